#ifndef MBRKIT_NUMERICS_HPP_
#define MBRKIT_NUMERICS_HPP_

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mbrkit/kernels.hpp"
#include "mbrkit/rng.hpp"

namespace mbrkit {

struct Clustering {
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> sizes;
  // Weighted within-cluster sum of squares after each update step.
  std::vector<double> objective_history;
  bool converged = false;
};

// Weighted Lloyd's algorithm. Centroids start at k distinct points drawn
// without replacement; a cluster left empty takes the point farthest from
// its centroid (from a cluster with at least two members). Centroids are
// weighted means of their members (uniform weights when `weights` is
// empty). Stops after `iters` rounds or when assignments repeat.
Clustering kmeans(std::span<const std::vector<double>> points, std::size_t k,
                  std::size_t iters, Rng& rng,
                  std::span<const double> weights = {});

struct MaskedEntry {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Partially observed matrix. Every row and column needs at least one
// observed entry and no cell may appear twice.
struct MaskedMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<MaskedEntry> observed;

  // Throws DataError describing the first violated invariant.
  void validate() const;
};

// `budget` distinct cells, row-major sorted. The first max(rows, cols)
// cells are (t mod rows, t mod cols) so every row and column is covered;
// the rest are uniform without replacement. Throws DataError when budget
// < rows + cols - 1; budget >= rows * cols returns every cell.
std::vector<std::pair<std::size_t, std::size_t>> sample_cells(
    std::size_t rows, std::size_t cols, std::size_t budget, Rng& rng);

struct Completion {
  std::size_t rows = 0;
  std::size_t cols = 0;
  // Row-major U * V^T.
  std::vector<double> values;
  // Regularized objective after each half-iteration (U solve, V solve).
  std::vector<double> objective_history;

  double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// Alternating ridge regressions for U (rows x rank) and V (cols x rank)
// against the observed entries, starting from uniform [-0.5, 0.5]/sqrt(rank)
// factors (U drawn first). Minimizes
//   sum_obs (m_ij - u_i.v_j)^2 + reg (|U|^2 + |V|^2).
Completion als_complete(const MaskedMatrix& m, std::size_t rank,
                        std::size_t iters, double reg, Rng& rng);

// Fraction of `n_boot` column resamples (with replacement, drawn by
// `weights`, same size as the matrix width) in which each row lands in the
// top-nbest by mean utility. Ties go to the lower row index.
std::vector<double> bootstrap_win_rates(const UtilityMatrix& sub_matrix,
                                        std::span<const double> weights,
                                        std::size_t n_boot, std::size_t nbest,
                                        Rng& rng);

}  // namespace mbrkit

#endif  // MBRKIT_NUMERICS_HPP_
