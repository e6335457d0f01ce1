#ifndef MBRKIT_KERNELS_HPP_
#define MBRKIT_KERNELS_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mbrkit/metrics.hpp"

namespace mbrkit {

// Dense row-major |H| x |R| utility table. Values are stored as the metric
// returns them; `higher_better` records the orientation.
struct UtilityMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
  bool higher_better = true;

  UtilityMatrix() = default;
  UtilityMatrix(std::size_t r, std::size_t c, bool hb = true)
      : rows(r), cols(c), values(r * c, 0.0), higher_better(hb) {}

  double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * cols, cols};
  }
};

// Copy negated when the matrix is lower-is-better, so that larger is
// always preferred; the result has higher_better = true.
UtilityMatrix oriented(const UtilityMatrix& m);

// (i, j) = metric(hypotheses[i], references[j]); one profiled
// "metric.score" block per cell. Rows are distributed over OpenMP threads;
// every cell is computed independently so the result does not depend on
// the schedule. The first exception by row order is rethrown.
UtilityMatrix score_matrix(const Metric& metric,
                           std::span<const std::string> hypotheses,
                           std::span<const std::string> references);

// Single-threaded reference for score_matrix.
UtilityMatrix score_matrix_serial(const Metric& metric,
                                  std::span<const std::string> hypotheses,
                                  std::span<const std::string> references);

// out[i] = sum_j weights[j] * m(i, j), accumulated in ascending j.
std::vector<double> weighted_row_sums(const UtilityMatrix& m,
                                      std::span<const double> weights);

std::vector<double> weighted_row_sums_serial(const UtilityMatrix& m,
                                             std::span<const double> weights);

// Indices of the k largest scores, descending; ties go to the lower index.
std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k);

}  // namespace mbrkit

#endif  // MBRKIT_KERNELS_HPP_
