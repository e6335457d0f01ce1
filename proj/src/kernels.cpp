#include "mbrkit/kernels.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

#include "mbrkit/error.hpp"
#include "mbrkit/profiler.hpp"

namespace mbrkit {
namespace {

void score_row(const Metric& metric, std::string_view hypothesis,
               std::span<const std::string> references, double* out) {
  for (std::size_t j = 0; j < references.size(); ++j) {
    auto scope = measure("metric.score");
    out[j] = metric.score(hypothesis, references[j]);
  }
}

void check_weights(const UtilityMatrix& m, std::span<const double> weights) {
  if (weights.size() != m.cols) {
    throw DataError("utility matrix has " + std::to_string(m.cols) +
                    " columns but " + std::to_string(weights.size()) +
                    " weights were given");
  }
}

}  // namespace

UtilityMatrix oriented(const UtilityMatrix& m) {
  UtilityMatrix out = m;
  if (!m.higher_better) {
    for (double& v : out.values) v = -v;
    out.higher_better = true;
  }
  return out;
}

UtilityMatrix score_matrix(const Metric& metric,
                           std::span<const std::string> hypotheses,
                           std::span<const std::string> references) {
  UtilityMatrix m(hypotheses.size(), references.size(),
                  metric.descriptor().higher_better);
  const auto rows = static_cast<std::ptrdiff_t>(hypotheses.size());
  std::vector<std::exception_ptr> errors(hypotheses.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    try {
      score_row(metric, hypotheses[r], references, m.values.data() + r * m.cols);
    } catch (...) {
      errors[r] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return m;
}

UtilityMatrix score_matrix_serial(const Metric& metric,
                                  std::span<const std::string> hypotheses,
                                  std::span<const std::string> references) {
  UtilityMatrix m(hypotheses.size(), references.size(),
                  metric.descriptor().higher_better);
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    score_row(metric, hypotheses[i], references, m.values.data() + i * m.cols);
  }
  return m;
}

std::vector<double> weighted_row_sums(const UtilityMatrix& m,
                                      std::span<const double> weights) {
  check_weights(m, weights);
  std::vector<double> out(m.rows, 0.0);
  const auto rows = static_cast<std::ptrdiff_t>(m.rows);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    const auto r = static_cast<std::size_t>(i);
    const double* row = m.values.data() + r * m.cols;
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += weights[j] * row[j];
    out[r] = s;
  }
  return out;
}

std::vector<double> weighted_row_sums_serial(const UtilityMatrix& m,
                                             std::span<const double> weights) {
  check_weights(m, weights);
  std::vector<double> out(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += weights[j] * m.at(i, j);
    out[i] = s;
  }
  return out;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  order.resize(k);
  return order;
}

}  // namespace mbrkit
