#include "mbrkit/numerics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "mbrkit/error.hpp"
#include "mbrkit/profiler.hpp"

namespace mbrkit {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Observation {
  std::size_t index;
  double value;
};

// Solves every row of `target` by ridge regression against the fixed
// factor `other`, using the observations listed per row.
void solve_factor(RowMatrix& target, const RowMatrix& other,
                  const std::vector<std::vector<Observation>>& lists, double reg) {
  const auto rank = other.cols();
  const auto n = static_cast<std::ptrdiff_t>(lists.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    Eigen::MatrixXd gram = reg * Eigen::MatrixXd::Identity(rank, rank);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rank);
    for (const auto& obs : lists[static_cast<std::size_t>(i)]) {
      const auto v = other.row(static_cast<Eigen::Index>(obs.index)).transpose();
      gram.noalias() += v * v.transpose();
      rhs.noalias() += obs.value * v;
    }
    target.row(i) = gram.ldlt().solve(rhs).transpose();
  }
}

double als_objective(const RowMatrix& u, const RowMatrix& v,
                     const MaskedMatrix& m, double reg) {
  double err = 0.0;
  for (const auto& e : m.observed) {
    const double r = e.value - u.row(static_cast<Eigen::Index>(e.row))
                                   .dot(v.row(static_cast<Eigen::Index>(e.col)));
    err += r * r;
  }
  return err + reg * (u.squaredNorm() + v.squaredNorm());
}

}  // namespace

Clustering kmeans(std::span<const std::vector<double>> points, std::size_t k,
                  std::size_t iters, Rng& rng, std::span<const double> weights) {
  auto scope = measure("kmeans");
  const std::size_t n = points.size();
  if (n == 0) throw DataError("kmeans: no points");
  if (k == 0) throw DataError("kmeans: k must be ≥ 1");
  const std::size_t dim = points[0].size();
  for (const auto& p : points) {
    if (p.size() != dim) throw DataError("kmeans: points differ in dimension");
  }
  if (!weights.empty() && weights.size() != n) {
    throw DataError("kmeans: weights length differs from point count");
  }
  const std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (k > distinct.size()) {
    throw DataError("kmeans: k=" + std::to_string(k) + " exceeds the " +
                    std::to_string(distinct.size()) + " distinct points");
  }
  auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  Clustering c;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < n && c.centroids.size() < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
    const auto& candidate = points[order[i]];
    if (std::find(c.centroids.begin(), c.centroids.end(), candidate) ==
        c.centroids.end()) {
      c.centroids.push_back(candidate);
    }
  }

  c.assignment.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  std::vector<std::size_t> previous;
  for (std::size_t it = 0; it < iters; ++it) {
    const auto np = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < np; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = squared_distance(points[i], c.centroids[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      c.assignment[i] = best;
      dist[i] = best_d;
    }

    c.sizes.assign(k, 0);
    for (std::size_t a : c.assignment) ++c.sizes[a];
    for (std::size_t j = 0; j < k; ++j) {
      if (c.sizes[j] != 0) continue;
      std::size_t victim = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (c.sizes[c.assignment[i]] < 2) continue;
        if (victim == n || dist[i] > dist[victim]) victim = i;
      }
      if (victim == n) break;
      --c.sizes[c.assignment[victim]];
      c.assignment[victim] = j;
      c.sizes[j] = 1;
      c.centroids[j] = points[victim];
      dist[victim] = 0.0;
    }

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<double> mass(k, 0.0);
    std::vector<std::size_t> last(k, n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = c.assignment[i];
      const double w = weight(i);
      for (std::size_t d = 0; d < dim; ++d) sums[a][d] += w * points[i][d];
      mass[a] += w;
      last[a] = i;
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (c.sizes[j] == 0) continue;
      if (c.sizes[j] == 1) {
        c.centroids[j] = points[last[j]];
      } else if (mass[j] > 0.0) {
        for (std::size_t d = 0; d < dim; ++d) c.centroids[j][d] = sums[j][d] / mass[j];
      } else {
        std::vector<double> mean(dim, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
          if (c.assignment[i] != j) continue;
          for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
        }
        for (double& x : mean) x /= static_cast<double>(c.sizes[j]);
        c.centroids[j] = std::move(mean);
      }
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      objective += weight(i) * squared_distance(points[i], c.centroids[c.assignment[i]]);
    }
    c.objective_history.push_back(objective);

    if (c.assignment == previous) {
      c.converged = true;
      break;
    }
    previous = c.assignment;
  }
  return c;
}

void MaskedMatrix::validate() const {
  if (rows == 0 || cols == 0) throw DataError("masked matrix has no rows or columns");
  std::vector<char> seen(rows * cols, 0);
  std::vector<std::size_t> per_row(rows, 0);
  std::vector<std::size_t> per_col(cols, 0);
  for (const auto& e : observed) {
    if (e.row >= rows || e.col >= cols) {
      throw DataError("observed entry (" + std::to_string(e.row) + ", " +
                      std::to_string(e.col) + ") out of range");
    }
    if (!std::isfinite(e.value)) throw DataError("observed entry is not finite");
    auto& flag = seen[e.row * cols + e.col];
    if (flag) {
      throw DataError("duplicate observed entry (" + std::to_string(e.row) +
                      ", " + std::to_string(e.col) + ")");
    }
    flag = 1;
    ++per_row[e.row];
    ++per_col[e.col];
  }
  for (std::size_t i = 0; i < rows; ++i) {
    if (per_row[i] == 0) throw DataError("row " + std::to_string(i) + " has no observed entry");
  }
  for (std::size_t j = 0; j < cols; ++j) {
    if (per_col[j] == 0) throw DataError("column " + std::to_string(j) + " has no observed entry");
  }
}

std::vector<std::pair<std::size_t, std::size_t>> sample_cells(
    std::size_t rows, std::size_t cols, std::size_t budget, Rng& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  if (rows == 0 || cols == 0) return cells;
  const std::size_t total = rows * cols;
  if (budget + 1 < rows + cols) {
    throw DataError("cell budget " + std::to_string(budget) +
                    " is below the coverage minimum " +
                    std::to_string(rows + cols - 1));
  }
  if (budget >= total) {
    cells.reserve(total);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) cells.emplace_back(i, j);
    }
    return cells;
  }
  std::vector<char> taken(total, 0);
  const std::size_t cover = std::max(rows, cols);
  for (std::size_t t = 0; t < cover; ++t) taken[(t % rows) * cols + (t % cols)] = 1;
  std::vector<std::size_t> free_cells;
  free_cells.reserve(total - cover);
  for (std::size_t c = 0; c < total; ++c) {
    if (!taken[c]) free_cells.push_back(c);
  }
  const std::size_t extra = budget - cover;
  for (std::size_t t = 0; t < extra; ++t) {
    const std::size_t pick = t + static_cast<std::size_t>(rng.below(free_cells.size() - t));
    std::swap(free_cells[t], free_cells[pick]);
    taken[free_cells[t]] = 1;
  }
  cells.reserve(budget);
  for (std::size_t c = 0; c < total; ++c) {
    if (taken[c]) cells.emplace_back(c / cols, c % cols);
  }
  return cells;
}

Completion als_complete(const MaskedMatrix& m, std::size_t rank,
                        std::size_t iters, double reg, Rng& rng) {
  auto scope = measure("als");
  m.validate();
  if (rank == 0 || rank > std::min(m.rows, m.cols)) {
    throw DataError("als: rank " + std::to_string(rank) + " must be in [1, " +
                    std::to_string(std::min(m.rows, m.cols)) + "]");
  }
  if (reg < 0.0) throw DataError("als: reg must be ≥ 0");

  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  const auto r = static_cast<Eigen::Index>(rank);
  RowMatrix u(static_cast<Eigen::Index>(m.rows), r);
  RowMatrix v(static_cast<Eigen::Index>(m.cols), r);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    for (Eigen::Index j = 0; j < r; ++j) u(i, j) = rng.uniform(-0.5, 0.5) * scale;
  }
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < r; ++j) v(i, j) = rng.uniform(-0.5, 0.5) * scale;
  }

  std::vector<MaskedEntry> sorted = m.observed;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<std::vector<Observation>> by_row(m.rows);
  std::vector<std::vector<Observation>> by_col(m.cols);
  for (const auto& e : sorted) {
    by_row[e.row].push_back({e.col, e.value});
    by_col[e.col].push_back({e.row, e.value});
  }

  Completion out;
  out.rows = m.rows;
  out.cols = m.cols;
  for (std::size_t it = 0; it < iters; ++it) {
    solve_factor(u, v, by_row, reg);
    out.objective_history.push_back(als_objective(u, v, m, reg));
    solve_factor(v, u, by_col, reg);
    out.objective_history.push_back(als_objective(u, v, m, reg));
  }
  const RowMatrix full = u * v.transpose();
  out.values.assign(full.data(), full.data() + full.size());
  return out;
}

std::vector<double> bootstrap_win_rates(const UtilityMatrix& sub_matrix,
                                        std::span<const double> weights,
                                        std::size_t n_boot, std::size_t nbest,
                                        Rng& rng) {
  auto scope = measure("bootstrap");
  const std::size_t cols = sub_matrix.cols;
  if (weights.size() != cols || cols == 0) {
    throw DataError("bootstrap: " + std::to_string(weights.size()) +
                    " weights for " + std::to_string(cols) + " columns");
  }
  if (n_boot == 0) throw DataError("bootstrap: n_boot must be ≥ 1");
  std::vector<double> cdf(cols);
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  const double total = cdf.back();
  if (!(total > 0.0)) throw DataError("bootstrap: weights sum to zero");

  std::vector<double> wins(sub_matrix.rows, 0.0);
  std::vector<double> counts(cols);
  std::vector<double> scores(sub_matrix.rows);
  for (std::size_t b = 0; b < n_boot; ++b) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t t = 0; t < cols; ++t) {
      const double u = rng.uniform() * total;
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      std::size_t j = static_cast<std::size_t>(it - cdf.begin());
      if (j >= cols) j = cols - 1;
      while (weights[j] <= 0.0 && j > 0) --j;
      counts[j] += 1.0;
    }
    for (std::size_t i = 0; i < sub_matrix.rows; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += counts[j] * sub_matrix.at(i, j);
      scores[i] = s / static_cast<double>(cols);
    }
    for (std::size_t i : top_k(scores, nbest)) wins[i] += 1.0;
  }
  for (double& w : wins) w /= static_cast<double>(n_boot);
  return wins;
}

}  // namespace mbrkit
