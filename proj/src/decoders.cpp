#include "mbrkit/decoders.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>

#include "mbrkit/error.hpp"
#include "mbrkit/estimation.hpp"
#include "mbrkit/kernels.hpp"
#include "mbrkit/numerics.hpp"
#include "mbrkit/profiler.hpp"

namespace mbrkit {
namespace {

void require_reference_based(const Metric& metric, std::string_view decoder) {
  if (metric.descriptor().reference_free) {
    throw ConfigError("decoder '" + std::string(decoder) +
                      "' needs a reference-based metric, got '" +
                      metric.descriptor().name + "'");
  }
}

void check_nbest(const Instance& instance, std::size_t nbest) {
  if (instance.hypotheses.empty()) throw DataError("instance has no hypotheses");
  if (nbest == 0) throw ConfigError("nbest must be ≥ 1");
  if (nbest > instance.hypotheses.size()) {
    throw DataError("nbest " + std::to_string(nbest) + " exceeds the " +
                    std::to_string(instance.hypotheses.size()) + " hypotheses");
  }
}

// Ranks `scores` (indexed like `rows`, which index instance.hypotheses).
DecoderOutput make_output(const Instance& instance,
                          const std::vector<std::size_t>& rows,
                          const std::vector<double>& scores, std::size_t nbest) {
  DecoderOutput out;
  for (std::size_t r : top_k(scores, nbest)) {
    out.idx.push_back(rows[r]);
    out.sentence.push_back(instance.hypotheses[rows[r]]);
    out.score.push_back(scores[r]);
  }
  return out;
}

DecoderOutput make_output(const Instance& instance,
                          const std::vector<double>& scores, std::size_t nbest) {
  std::vector<std::size_t> rows(scores.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return make_output(instance, rows, scores, nbest);
}

double orientation(const Metric& metric) {
  return metric.descriptor().higher_better ? 1.0 : -1.0;
}

// Column order for progressive revealing: weighted sampling without
// replacement; zero-weight columns come last in index order.
std::vector<std::size_t> weighted_permutation(const std::vector<double>& w, Rng& rng) {
  std::vector<std::size_t> remaining;
  std::vector<std::size_t> zeros;
  for (std::size_t j = 0; j < w.size(); ++j) (w[j] > 0.0 ? remaining : zeros).push_back(j);
  std::vector<std::size_t> order;
  order.reserve(w.size());
  while (!remaining.empty()) {
    double total = 0.0;
    for (std::size_t j : remaining) total += w[j];
    double u = rng.uniform() * total;
    std::size_t pick = remaining.size() - 1;
    for (std::size_t t = 0; t < remaining.size(); ++t) {
      u -= w[remaining[t]];
      if (u < 0.0) {
        pick = t;
        break;
      }
    }
    order.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  order.insert(order.end(), zeros.begin(), zeros.end());
  return order;
}

}  // namespace

DecoderOutput decode_mbr(const Metric& metric, const Instance& instance,
                         Estimator estimator, std::size_t nbest) {
  auto scope = measure("decoder.mbr");
  require_reference_based(metric, "mbr");
  check_nbest(instance, nbest);
  const Weights weights = estimate_weights(instance, estimator);
  const UtilityMatrix matrix = oriented(
      score_matrix(metric, instance.hypotheses, instance.references.support()));
  return make_output(instance, expected_scores(matrix, weights), nbest);
}

DecoderOutput decode_rambr(const Metric& metric, const Instance& instance,
                           Estimator estimator, std::size_t nbest) {
  auto scope = measure("decoder.rambr");
  require_reference_based(metric, "rambr");
  check_nbest(instance, nbest);
  const Weights weights = estimate_weights(instance, estimator);
  const AggregateStats stats =
      aggregate(metric, instance.references.support(), weights.values);
  const double sign = orientation(metric);
  const auto& hyps = instance.hypotheses;
  std::vector<double> scores(hyps.size());
  std::vector<std::exception_ptr> errors(hyps.size());
  const auto n = static_cast<std::ptrdiff_t>(hyps.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      scores[i] = sign * score_aggregate(metric, hyps[i], stats);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return make_output(instance, scores, nbest);
}

DecoderOutput decode_cbmbr(const Metric& metric, const Instance& instance,
                           Estimator estimator, const CentroidParams& params,
                           Rng& rng, std::size_t nbest) {
  auto scope = measure("decoder.cbmbr");
  const auto* dot_metric = dynamic_cast<const DotMetric*>(&metric);
  if (dot_metric == nullptr) {
    throw ConfigError("decoder 'cbmbr' requires metric 'dot', got '" +
                      metric.descriptor().name + "'");
  }
  if (params.k == 0) throw ConfigError("k must be ≥ 1");
  check_nbest(instance, nbest);
  const Weights weights = estimate_weights(instance, estimator);
  const auto& embeddings = dot_metric->embeddings();
  const auto& support = instance.references.support();

  std::vector<std::vector<double>> points;
  points.reserve(support.size());
  for (const auto& r : support) points.push_back(embeddings.embed(r));
  const std::set<std::vector<double>> distinct(points.begin(), points.end());
  const std::size_t k = std::min(params.k, distinct.size());
  const Clustering clusters =
      kmeans(points, k, params.kmeans_iters, rng, weights.values);

  // Clusters are scored in order of their lowest member index, each with
  // the summed weight of its members.
  std::vector<std::size_t> first_member(k, support.size());
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    const std::size_t c = clusters.assignment[i];
    first_member[c] = std::min(first_member[c], i);
    mass[c] += weights.values[i];
  }
  std::vector<std::size_t> order;
  for (std::size_t c = 0; c < k; ++c) {
    if (first_member[c] < support.size()) order.push_back(c);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return first_member[a] < first_member[b];
  });

  const auto& hyps = instance.hypotheses;
  std::vector<double> scores(hyps.size(), 0.0);
  std::vector<std::exception_ptr> errors(hyps.size());
  const auto n = static_cast<std::ptrdiff_t>(hyps.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      const std::vector<double> e = embeddings.embed(hyps[i]);
      double s = 0.0;
      for (std::size_t c : order) {
        auto timer = measure("metric.score_centroid");
        const auto& centroid = clusters.centroids[c];
        double d = 0.0;
        for (std::size_t t = 0; t < e.size(); ++t) d += e[t] * centroid[t];
        s += mass[c] * d;
      }
      scores[i] = s;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return make_output(instance, scores, nbest);
}

DecoderOutput decode_prune(const Metric& metric, const Instance& instance,
                           Estimator estimator, const PruneParams& params,
                           Rng& rng, std::size_t nbest, PruneTrace* trace) {
  auto scope = measure("decoder.prune");
  require_reference_based(metric, "prune");
  check_nbest(instance, nbest);
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw ConfigError("alpha must be in (0, 1)");
  }
  if (params.initial_refs == 0) throw ConfigError("initial_refs must be ≥ 1");
  if (params.n_bootstrap == 0) throw ConfigError("n_bootstrap must be ≥ 1");

  const Weights weights = estimate_weights(instance, estimator);
  const auto& hyps = instance.hypotheses;
  const auto& support = instance.references.support();
  const std::size_t n_cols = support.size();
  const double sign = orientation(metric);
  const std::vector<std::size_t> order = weighted_permutation(weights.values, rng);

  UtilityMatrix cache(hyps.size(), n_cols);
  std::vector<std::size_t> survivors(hyps.size());
  std::iota(survivors.begin(), survivors.end(), std::size_t{0});
  std::size_t computed = 0;
  std::size_t revealed = std::min(params.initial_refs, n_cols);

  // Expected scores of `survivors` over the first `revealed` columns of
  // `order`, summed in ascending column index.
  auto expected = [&](std::size_t upto) {
    std::vector<std::size_t> cols(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(upto));
    std::sort(cols.begin(), cols.end());
    std::vector<double> w(cols.size());
    double total = 0.0;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      w[t] = weights.values[cols[t]];
      total += w[t];
    }
    if (upto < n_cols && total > 0.0) {
      for (double& x : w) x /= total;
    }
    UtilityMatrix sub(survivors.size(), cols.size());
    for (std::size_t r = 0; r < survivors.size(); ++r) {
      for (std::size_t t = 0; t < cols.size(); ++t) {
        sub.at(r, t) = cache.at(survivors[r], cols[t]);
      }
    }
    return std::make_pair(std::move(sub), std::move(w));
  };

  // Fills utilities for survivors on columns order[computed, revealed).
  auto fill = [&] {
    const auto n_rows = static_cast<std::ptrdiff_t>(survivors.size());
    std::vector<std::exception_ptr> errors(survivors.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t rr = 0; rr < n_rows; ++rr) {
      const auto r = static_cast<std::size_t>(rr);
      const std::size_t i = survivors[r];
      try {
        for (std::size_t t = computed; t < revealed; ++t) {
          auto timer = measure("metric.score");
          cache.at(i, order[t]) = sign * metric.score(hyps[i], support[order[t]]);
        }
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    computed = revealed;
  };

  while (true) {
    fill();
    if (trace != nullptr) {
      trace->revealed.push_back(revealed);
      trace->survivors.push_back(survivors);
    }
    if (revealed == n_cols || survivors.size() <= nbest) break;

    auto [sub, w] = expected(revealed);
    const std::vector<double> rates =
        bootstrap_win_rates(sub, w, params.n_bootstrap, nbest, rng);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < survivors.size(); ++r) {
      if (rates[r] >= 1.0 - params.alpha) keep.push_back(r);
    }
    if (keep.size() < nbest) {
      // Floor: retain the nbest highest win rates, then expected scores.
      const std::vector<double> mu = weighted_row_sums(sub, w);
      std::vector<std::size_t> by_rate(survivors.size());
      std::iota(by_rate.begin(), by_rate.end(), std::size_t{0});
      std::stable_sort(by_rate.begin(), by_rate.end(), [&](std::size_t a, std::size_t b) {
        if (rates[a] != rates[b]) return rates[a] > rates[b];
        return mu[a] > mu[b];
      });
      keep.assign(by_rate.begin(), by_rate.begin() + static_cast<std::ptrdiff_t>(nbest));
      std::sort(keep.begin(), keep.end());
    }
    std::vector<std::size_t> next;
    next.reserve(keep.size());
    for (std::size_t r : keep) next.push_back(survivors[r]);
    survivors = std::move(next);
    if (survivors.size() <= nbest) break;
    revealed = std::min(2 * revealed, n_cols);
  }

  // Once only nbest rows remain, rank them on every column.
  if (revealed < n_cols) {
    revealed = n_cols;
    fill();
  }
  if (trace != nullptr) trace->final_survivors = survivors;
  auto [sub, w] = expected(revealed);
  return make_output(instance, survivors, weighted_row_sums(sub, w), nbest);
}

DecoderOutput decode_pmbr(const Metric& metric, const Instance& instance,
                          Estimator estimator, const PmbrParams& params,
                          Rng& rng, std::size_t nbest) {
  auto scope = measure("decoder.pmbr");
  require_reference_based(metric, "pmbr");
  check_nbest(instance, nbest);
  if (!(params.reduction_factor >= 1.0)) {
    throw ConfigError("reduction_factor must be ≥ 1");
  }
  const Weights weights = estimate_weights(instance, estimator);
  const auto& hyps = instance.hypotheses;
  const auto& support = instance.references.support();
  const std::size_t rows = hyps.size();
  const std::size_t cols = support.size();
  const std::size_t total = rows * cols;
  const auto budget = std::min<std::size_t>(
      total, static_cast<std::size_t>(
                 std::ceil(static_cast<double>(total) / params.reduction_factor)));
  if (budget + 1 < rows + cols) {
    throw DataError("reduction factor too aggressive for matrix shape: " +
                    std::to_string(budget) + " cells for a " +
                    std::to_string(rows) + "x" + std::to_string(cols) +
                    " matrix (need ≥ " + std::to_string(rows + cols - 1) + ")");
  }
  if (budget == total) {
    const UtilityMatrix matrix = oriented(score_matrix(metric, hyps, support));
    return make_output(instance, expected_scores(matrix, weights), nbest);
  }

  const auto cells = sample_cells(rows, cols, budget, rng);
  const double sign = orientation(metric);
  MaskedMatrix masked;
  masked.rows = rows;
  masked.cols = cols;
  masked.observed.resize(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  const auto n_cells = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t cc = 0; cc < n_cells; ++cc) {
    const auto c = static_cast<std::size_t>(cc);
    const auto [i, j] = cells[c];
    try {
      auto timer = measure("metric.score");
      masked.observed[c] = {i, j, sign * metric.score(hyps[i], support[j])};
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const std::size_t rank = std::min({params.rank, rows, cols});
  const Completion completed =
      als_complete(masked, rank, params.als_iters, params.als_reg, rng);
  UtilityMatrix matrix(rows, cols);
  matrix.values = completed.values;
  for (const auto& e : masked.observed) matrix.at(e.row, e.col) = e.value;
  return make_output(instance, expected_scores(matrix, weights), nbest);
}

DecoderOutput rerank_qe(const Metric& metric, const Instance& instance,
                        std::size_t nbest) {
  auto scope = measure("decoder.rerank");
  if (!metric.descriptor().reference_free) {
    throw ConfigError("decoder 'rerank' needs a reference-free metric, got '" +
                      metric.descriptor().name + "'");
  }
  check_nbest(instance, nbest);
  if (!instance.source) {
    throw DataError("quality-estimation reranking requires a source text");
  }
  const double sign = orientation(metric);
  std::vector<double> scores(instance.hypotheses.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto timer = measure("metric.score");
    scores[i] = sign * metric.score(instance.hypotheses[i], *instance.source);
  }
  return make_output(instance, scores, nbest);
}

DecoderOutput decode(const Metric& metric, const Instance& instance,
                     const Config& config, Rng& rng) {
  const auto& d = config.decoder;
  if (d == "mbr") return decode_mbr(metric, instance, config.estimator, config.nbest);
  if (d == "rambr") {
    return decode_rambr(metric, instance, config.estimator, config.nbest);
  }
  if (d == "cbmbr") {
    return decode_cbmbr(metric, instance, config.estimator,
                        {config.k, config.kmeans_iters}, rng, config.nbest);
  }
  if (d == "prune") {
    return decode_prune(metric, instance, config.estimator,
                        {config.alpha, config.n_bootstrap, config.initial_refs},
                        rng, config.nbest);
  }
  if (d == "pmbr") {
    return decode_pmbr(metric, instance, config.estimator,
                       {config.reduction_factor, config.rank, config.als_iters,
                        config.als_reg},
                       rng, config.nbest);
  }
  if (d == "rerank") return rerank_qe(metric, instance, config.nbest);
  throw ConfigError("unknown decoder '" + d + "'");
}

std::vector<DecoderOutput> decode_batch(const Metric& metric,
                                        const std::vector<Instance>& instances,
                                        const Config& config) {
  std::vector<DecoderOutput> outputs(instances.size());
  std::vector<std::exception_ptr> errors(instances.size());
  const Rng root(config.seed);
  const auto n = static_cast<std::ptrdiff_t>(instances.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    try {
      Rng rng = root.split(i);
      outputs[i] = decode(metric, instances[i], config, rng);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const DataError& e) {
      std::string name = "instance " + std::to_string(i);
      if (instances[i].id) name += " (id=" + *instances[i].id + ")";
      throw DataError(name + ": " + e.what());
    }
  }
  return outputs;
}

}  // namespace mbrkit
