#include "mbrkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "mbrkit/error.hpp"
#include "mbrkit/profiler.hpp"
#include "mbrkit/rng.hpp"
#include "text.hpp"

namespace mbrkit {
namespace {

constexpr std::uint32_t kUnknownId = std::numeric_limits<std::uint32_t>::max();
constexpr double kBleuZeroMatchFloor = 0.1;
constexpr double kChrfBeta = 2.0;

template <std::size_t M>
using GramCounts = std::vector<std::pair<std::array<std::uint32_t, M>, std::uint32_t>>;

// Sorted (n-gram, count) list of order n over seq.
template <std::size_t M>
GramCounts<M> count_grams(std::span<const std::uint32_t> seq, std::size_t n) {
  GramCounts<M> out;
  if (seq.size() < n) return out;
  std::vector<std::array<std::uint32_t, M>> grams(seq.size() - n + 1);
  for (std::size_t i = 0; i < grams.size(); ++i) {
    grams[i].fill(0);
    std::copy_n(seq.begin() + static_cast<std::ptrdiff_t>(i), n, grams[i].begin());
  }
  std::sort(grams.begin(), grams.end());
  for (const auto& g : grams) {
    if (!out.empty() && out.back().first == g) {
      ++out.back().second;
    } else {
      out.emplace_back(g, 1);
    }
  }
  return out;
}

// Sum over shared n-grams of min(count_a, count_b).
template <std::size_t M>
std::uint64_t clipped_matches(const GramCounts<M>& a, const GramCounts<M>& b) {
  std::uint64_t total = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      total += std::min(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  return total;
}

// Maps whitespace tokens of both strings to shared integer ids.
struct TokenPair {
  std::vector<std::uint32_t> hyp;
  std::vector<std::uint32_t> ref;
};

TokenPair intern_pair(std::string_view hypothesis, std::string_view reference) {
  std::unordered_map<std::string_view, std::uint32_t> ids;
  auto encode = [&ids](std::string_view s) {
    std::vector<std::uint32_t> out;
    for (auto tok : text::split_whitespace(s)) {
      auto [it, inserted] =
          ids.emplace(tok, static_cast<std::uint32_t>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  TokenPair p;
  p.hyp = encode(hypothesis);
  p.ref = encode(reference);
  return p;
}

std::vector<std::uint32_t> as_ids(const std::vector<char32_t>& chars) {
  return {chars.begin(), chars.end()};
}

double bleu_from_stats(const std::array<double, kBleuMaxOrder>& matches,
                       std::size_t hyp_len, double ref_len) {
  if (hyp_len == 0) return 0.0;
  const std::size_t order = std::min(kBleuMaxOrder, hyp_len);
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= order; ++n) {
    double m = matches[n - 1];
    if (m <= 0.0) {
      if (n == 1) return 0.0;
      m = kBleuZeroMatchFloor;
    }
    log_sum += std::log(m / static_cast<double>(hyp_len - n + 1));
  }
  const double h = static_cast<double>(hyp_len);
  const double bp = h > ref_len ? 1.0 : std::exp(1.0 - ref_len / h);
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(order));
}

double chrf_from_stats(const std::array<double, kChrfMaxOrder>& matches,
                       const std::array<double, kChrfMaxOrder>& hyp_totals,
                       const std::array<double, kChrfMaxOrder>& ref_totals) {
  const double beta2 = kChrfBeta * kChrfBeta;
  double sum = 0.0;
  int effective = 0;
  for (std::size_t n = 0; n < kChrfMaxOrder; ++n) {
    if (ref_totals[n] <= 0.0) continue;
    ++effective;
    if (hyp_totals[n] <= 0.0 || matches[n] <= 0.0) continue;
    const double p = matches[n] / hyp_totals[n];
    const double r = matches[n] / ref_totals[n];
    sum += (1.0 + beta2) * p * r / (beta2 * p + r);
  }
  if (effective == 0) return hyp_totals[0] <= 0.0 ? 100.0 : 0.0;
  return 100.0 * sum / static_cast<double>(effective);
}

std::size_t edit_distance(std::span<const std::uint32_t> a,
                          std::span<const std::uint32_t> b) {
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

// Moves seq[start, start+len) so that it begins at position `dest` of the
// sequence with the block removed.
std::vector<std::uint32_t> shift_block(std::span<const std::uint32_t> seq,
                                       std::size_t start, std::size_t len,
                                       std::size_t dest) {
  std::vector<std::uint32_t> rest;
  rest.reserve(seq.size());
  rest.insert(rest.end(), seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(start));
  rest.insert(rest.end(), seq.begin() + static_cast<std::ptrdiff_t>(start + len), seq.end());
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(dest),
              seq.begin() + static_cast<std::ptrdiff_t>(start),
              seq.begin() + static_cast<std::ptrdiff_t>(start + len));
  return rest;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
const T& stats_as(const AggregateStats& stats, std::string_view metric) {
  const T* p = std::get_if<T>(&stats);
  if (p == nullptr) {
    throw std::invalid_argument("aggregate statistics were not built by metric '" +
                                std::string(metric) + "'");
  }
  return *p;
}

template <typename T>
T& stats_as(AggregateStats& stats, std::string_view metric) {
  T* p = std::get_if<T>(&stats);
  if (p == nullptr) {
    throw std::invalid_argument("aggregate statistics were not built by metric '" +
                                std::string(metric) + "'");
  }
  return *p;
}

}  // namespace

// BLEU ----------------------------------------------------------------------

double bleu_score(std::string_view hypothesis, std::string_view reference) {
  const TokenPair t = intern_pair(hypothesis, reference);
  std::array<double, kBleuMaxOrder> matches{};
  for (std::size_t n = 1; n <= kBleuMaxOrder && n <= t.hyp.size(); ++n) {
    matches[n - 1] = static_cast<double>(
        clipped_matches(count_grams<kBleuMaxOrder>(t.hyp, n),
                        count_grams<kBleuMaxOrder>(t.ref, n)));
  }
  return bleu_from_stats(matches, t.hyp.size(), static_cast<double>(t.ref.size()));
}

double BleuAggregate::expected_count(std::span<const std::string> tokens) const {
  if (tokens.empty() || tokens.size() > kBleuMaxOrder) return 0.0;
  BleuGram g{};
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = vocab.find(tokens[i]);
    if (it == vocab.end()) return 0.0;
    g[i] = it->second;
  }
  const auto& table = tail[tokens.size() - 1];
  auto it = table.find(g);
  if (it == table.end()) return 0.0;
  double s = 0.0;
  for (double w : it->second) s += w;
  return s;
}

const MetricDescriptor& BleuMetric::descriptor() const {
  static const MetricDescriptor d{"bleu", true, true, false};
  return d;
}

double BleuMetric::score(std::string_view h, std::string_view r) const {
  return bleu_score(h, r);
}

AggregateStats BleuMetric::empty_aggregate() const { return BleuAggregate{}; }

void BleuMetric::accumulate(AggregateStats& stats, std::string_view reference,
                            double weight) const {
  auto& agg = stats_as<BleuAggregate>(stats, "bleu");
  std::vector<std::uint32_t> ids;
  for (auto tok : text::split_whitespace(reference)) {
    auto [it, inserted] = agg.vocab.emplace(
        std::string(tok), static_cast<std::uint32_t>(agg.vocab.size()));
    ids.push_back(it->second);
  }
  for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
    for (const auto& [gram, count] : count_grams<kBleuMaxOrder>(ids, n)) {
      auto& tail = agg.tail[n - 1][gram];
      if (tail.size() < count) tail.resize(count, 0.0);
      for (std::uint32_t t = 0; t < count; ++t) tail[t] += weight;
    }
  }
  agg.expected_length += weight * static_cast<double>(ids.size());
}

double BleuMetric::score_aggregate(std::string_view h,
                                   const AggregateStats& stats) const {
  const auto& agg = stats_as<BleuAggregate>(stats, "bleu");
  std::vector<std::uint32_t> ids;
  for (auto tok : text::split_whitespace(h)) {
    auto it = agg.vocab.find(std::string(tok));
    ids.push_back(it == agg.vocab.end() ? kUnknownId : it->second);
  }
  std::array<double, kBleuMaxOrder> matches{};
  for (std::size_t n = 1; n <= kBleuMaxOrder && n <= ids.size(); ++n) {
    const auto& table = agg.tail[n - 1];
    double m = 0.0;
    for (const auto& [gram, count] : count_grams<kBleuMaxOrder>(ids, n)) {
      auto it = table.find(gram);
      if (it == table.end()) continue;
      const std::size_t upto = std::min<std::size_t>(count, it->second.size());
      for (std::size_t t = 0; t < upto; ++t) m += it->second[t];
    }
    matches[n - 1] = m;
  }
  return bleu_from_stats(matches, ids.size(), agg.expected_length);
}

// chrF ----------------------------------------------------------------------

double chrf_score(std::string_view hypothesis, std::string_view reference) {
  const auto h = as_ids(text::non_space_chars(hypothesis));
  const auto r = as_ids(text::non_space_chars(reference));
  std::array<double, kChrfMaxOrder> matches{};
  std::array<double, kChrfMaxOrder> hyp_totals{};
  std::array<double, kChrfMaxOrder> ref_totals{};
  for (std::size_t n = 1; n <= kChrfMaxOrder; ++n) {
    hyp_totals[n - 1] = h.size() >= n ? static_cast<double>(h.size() - n + 1) : 0.0;
    ref_totals[n - 1] = r.size() >= n ? static_cast<double>(r.size() - n + 1) : 0.0;
    if (hyp_totals[n - 1] > 0.0 && ref_totals[n - 1] > 0.0) {
      matches[n - 1] = static_cast<double>(
          clipped_matches(count_grams<kChrfMaxOrder>(h, n),
                          count_grams<kChrfMaxOrder>(r, n)));
    }
  }
  return chrf_from_stats(matches, hyp_totals, ref_totals);
}

const MetricDescriptor& ChrfMetric::descriptor() const {
  static const MetricDescriptor d{"chrf", true, true, false};
  return d;
}

double ChrfMetric::score(std::string_view h, std::string_view r) const {
  return chrf_score(h, r);
}

AggregateStats ChrfMetric::empty_aggregate() const { return ChrfAggregate{}; }

void ChrfMetric::accumulate(AggregateStats& stats, std::string_view reference,
                            double weight) const {
  auto& agg = stats_as<ChrfAggregate>(stats, "chrf");
  const auto r = as_ids(text::non_space_chars(reference));
  for (std::size_t n = 1; n <= kChrfMaxOrder && n <= r.size(); ++n) {
    for (const auto& [gram, count] : count_grams<kChrfMaxOrder>(r, n)) {
      agg.counts[n - 1][gram] += weight * static_cast<double>(count);
    }
    agg.totals[n - 1] += weight * static_cast<double>(r.size() - n + 1);
  }
}

double ChrfMetric::score_aggregate(std::string_view h,
                                   const AggregateStats& stats) const {
  const auto& agg = stats_as<ChrfAggregate>(stats, "chrf");
  const auto chars = as_ids(text::non_space_chars(h));
  std::array<double, kChrfMaxOrder> matches{};
  std::array<double, kChrfMaxOrder> hyp_totals{};
  for (std::size_t n = 1; n <= kChrfMaxOrder && n <= chars.size(); ++n) {
    hyp_totals[n - 1] = static_cast<double>(chars.size() - n + 1);
    const auto& table = agg.counts[n - 1];
    double m = 0.0;
    for (const auto& [gram, count] : count_grams<kChrfMaxOrder>(chars, n)) {
      auto it = table.find(gram);
      if (it == table.end()) continue;
      m += std::min(static_cast<double>(count), it->second);
    }
    matches[n - 1] = m;
  }
  return chrf_from_stats(matches, hyp_totals, agg.totals);
}

// TER -----------------------------------------------------------------------

double ter_score(std::string_view hypothesis, std::string_view reference) {
  TokenPair t = intern_pair(hypothesis, reference);
  if (t.ref.empty()) throw DataError("TER undefined for empty reference");
  std::vector<std::uint32_t> hyp = std::move(t.hyp);
  std::size_t distance = edit_distance(hyp, t.ref);
  std::size_t shifts = 0;
  while (distance > 0) {
    std::size_t best = distance;
    std::vector<std::uint32_t> best_seq;
    for (std::size_t start = 0; start < hyp.size(); ++start) {
      for (std::size_t len = 1; start + len <= hyp.size(); ++len) {
        for (std::size_t dest = 0; dest + len <= hyp.size(); ++dest) {
          if (dest == start) continue;
          auto candidate = shift_block(hyp, start, len, dest);
          const std::size_t d = edit_distance(candidate, t.ref);
          if (d < best) {
            best = d;
            best_seq = std::move(candidate);
          }
        }
      }
    }
    if (best >= distance) break;
    hyp = std::move(best_seq);
    distance = best;
    ++shifts;
  }
  return static_cast<double>(shifts + distance) / static_cast<double>(t.ref.size());
}

const MetricDescriptor& TerMetric::descriptor() const {
  static const MetricDescriptor d{"ter", false, false, false};
  return d;
}

double TerMetric::score(std::string_view h, std::string_view r) const {
  return ter_score(h, r);
}

// Embeddings ----------------------------------------------------------------

std::vector<double> hash_embed(std::string_view text_in, std::size_t dim,
                               std::uint64_t seed) {
  if (dim < 2) throw ConfigError("hash_dim must be ≥ 2");
  std::vector<char32_t> chars;
  chars.push_back(0x02);
  const auto body = text::decode_utf8(text_in);
  chars.insert(chars.end(), body.begin(), body.end());
  chars.push_back(0x03);
  std::vector<double> v(dim, 0.0);
  if (!body.empty()) {
    const std::uint64_t base = splitmix64(seed);
    for (std::size_t i = 0; i + 3 <= chars.size(); ++i) {
      std::uint64_t h = base;
      for (std::size_t k = 0; k < 3; ++k) h = splitmix64(h ^ chars[i + k]);
      const std::size_t bucket = static_cast<std::size_t>(h % dim);
      const double sign = (splitmix64(h) >> 63) != 0 ? -1.0 : 1.0;
      v[bucket] += sign;
    }
  }
  double norm2 = 0.0;
  for (double x : v) norm2 += x * x;
  if (norm2 == 0.0) {
    v.assign(dim, 0.0);
    v[0] = 1.0;
    return v;
  }
  const double norm = std::sqrt(norm2);
  for (double& x : v) x /= norm;
  return v;
}

EmbeddingProvider::EmbeddingProvider(std::shared_ptr<const EmbeddingTable> table,
                                     std::optional<HashOptions> hash)
    : table_(std::move(table)), hash_(hash) {
  if (hash_ && hash_->dim < 2) throw ConfigError("hash_dim must be ≥ 2");
  if (table_ && table_->dim() > 0) {
    dim_ = table_->dim();
    if (hash_ && hash_->dim != dim_) {
      throw ConfigError("hash_dim " + std::to_string(hash_->dim) +
                        " differs from embedding dimension " +
                        std::to_string(dim_));
    }
  } else if (hash_) {
    dim_ = hash_->dim;
  }
  if (!table_ && !hash_) {
    throw ConfigError("embedding metric needs an embedding table or hash_dim");
  }
}

const std::vector<double>& EmbeddingProvider::lookup(
    std::string_view text, std::vector<double>& scratch) const {
  if (table_) {
    if (const auto* v = table_->find(text)) return *v;
  }
  if (hash_) {
    scratch = hash_embed(text, hash_->dim, hash_->seed);
    return scratch;
  }
  throw DataError("no embedding for text '" + std::string(text) + "'");
}

std::vector<double> EmbeddingProvider::embed(std::string_view text) const {
  std::vector<double> scratch;
  const auto& v = lookup(text, scratch);
  return &v == &scratch ? std::move(scratch) : v;
}

bool EmbeddingProvider::has(std::string_view text) const {
  return hash_.has_value() || (table_ && table_->find(text) != nullptr);
}

double dot_score(std::string_view hypothesis, std::string_view reference,
                 const EmbeddingProvider& embeddings) {
  std::vector<double> sa;
  std::vector<double> sb;
  const auto& a = embeddings.lookup(hypothesis, sa);
  const auto& b = embeddings.lookup(reference, sb);
  return dot(a, b);
}

double qe_score(std::string_view hypothesis, std::string_view source,
                const EmbeddingProvider& embeddings) {
  return dot_score(hypothesis, source, embeddings);
}

const MetricDescriptor& DotMetric::descriptor() const {
  static const MetricDescriptor d{"dot", true, true, false};
  return d;
}

double DotMetric::score(std::string_view h, std::string_view r) const {
  return dot_score(h, r, embeddings_);
}

AggregateStats DotMetric::empty_aggregate() const {
  return DotAggregate{std::vector<double>(embeddings_.dim(), 0.0)};
}

void DotMetric::accumulate(AggregateStats& stats, std::string_view reference,
                           double weight) const {
  auto& agg = stats_as<DotAggregate>(stats, "dot");
  std::vector<double> scratch;
  const auto& v = embeddings_.lookup(reference, scratch);
  for (std::size_t i = 0; i < v.size(); ++i) agg.mean[i] += weight * v[i];
}

double DotMetric::score_aggregate(std::string_view h,
                                  const AggregateStats& stats) const {
  const auto& agg = stats_as<DotAggregate>(stats, "dot");
  std::vector<double> scratch;
  return dot(embeddings_.lookup(h, scratch), agg.mean);
}

const MetricDescriptor& QeDotMetric::descriptor() const {
  static const MetricDescriptor d{"qe-dot", true, false, true};
  return d;
}

double QeDotMetric::score(std::string_view h, std::string_view source) const {
  return qe_score(h, source, embeddings_);
}

// Generic -------------------------------------------------------------------

AggregateStats Metric::empty_aggregate() const {
  throw ConfigError("metric '" + descriptor().name +
                    "' does not support reference aggregation");
}

void Metric::accumulate(AggregateStats&, std::string_view, double) const {
  throw ConfigError("metric '" + descriptor().name +
                    "' does not support reference aggregation");
}

double Metric::score_aggregate(std::string_view, const AggregateStats&) const {
  throw ConfigError("metric '" + descriptor().name +
                    "' does not support reference aggregation");
}

std::unique_ptr<Metric> make_metric(std::string_view name,
                                    const MetricOptions& options) {
  if (name == "bleu") return std::make_unique<BleuMetric>();
  if (name == "chrf") return std::make_unique<ChrfMetric>();
  if (name == "ter") return std::make_unique<TerMetric>();
  if (name == "dot") {
    return std::make_unique<DotMetric>(
        EmbeddingProvider(options.embeddings, options.hash));
  }
  if (name == "qe-dot") {
    return std::make_unique<QeDotMetric>(
        EmbeddingProvider(options.embeddings, options.hash));
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

AggregateStats aggregate(const Metric& metric,
                         std::span<const std::string> references,
                         std::span<const double> weights) {
  if (!metric.descriptor().aggregatable) {
    throw ConfigError("metric '" + metric.descriptor().name +
                      "' does not support reference aggregation");
  }
  if (weights.size() != references.size()) {
    throw DataError("aggregate: " + std::to_string(weights.size()) +
                    " weights for " + std::to_string(references.size()) +
                    " references");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DataError("aggregate: negative or NaN weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw DataError("aggregate: weights sum to " + std::to_string(total) +
                    ", expected 1");
  }
  // Repeated references are merged and the merged weights rescaled by
  // their total, so a bag of one distinct text gets weight exactly 1.
  std::vector<std::string_view> distinct;
  std::vector<double> merged;
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t j = 0; j < references.size(); ++j) {
    auto [it, inserted] = position.emplace(references[j], distinct.size());
    if (inserted) {
      distinct.push_back(references[j]);
      merged.push_back(weights[j]);
    } else {
      merged[it->second] += weights[j];
    }
  }
  double merged_total = 0.0;
  for (double w : merged) merged_total += w;
  AggregateStats stats = metric.empty_aggregate();
  for (std::size_t j = 0; j < distinct.size(); ++j) {
    auto scope = measure("metric.aggregate");
    metric.accumulate(stats, distinct[j], merged[j] / merged_total);
  }
  return stats;
}

double score_aggregate(const Metric& metric, std::string_view hypothesis,
                       const AggregateStats& stats) {
  auto scope = measure("metric.score_aggregate");
  return metric.score_aggregate(hypothesis, stats);
}

}  // namespace mbrkit
