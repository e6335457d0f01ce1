#ifndef MBRKIT_METRICS_HPP_
#define MBRKIT_METRICS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mbrkit/corpus.hpp"

namespace mbrkit {

struct MetricDescriptor {
  std::string name;
  bool higher_better = true;
  bool aggregatable = false;
  bool reference_free = false;
};

namespace detail {

template <std::size_t N>
struct GramHash {
  std::size_t operator()(const std::array<std::uint32_t, N>& g) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto x : g) h = (h ^ x) * 0x100000001b3ULL;
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

}  // namespace detail

inline constexpr std::size_t kBleuMaxOrder = 4;
inline constexpr std::size_t kChrfMaxOrder = 6;

using BleuGram = std::array<std::uint32_t, kBleuMaxOrder>;
using ChrfGram = std::array<std::uint32_t, kChrfMaxOrder>;

// Weighted reference statistics for BLEU. For every n-gram g of order n,
// tail[n-1][g][t] = sum of weights of references containing g at least
// t+1 times, so the expected clipped count of a hypothesis n-gram seen c
// times is tail[0] + ... + tail[c-1].
struct BleuAggregate {
  std::unordered_map<std::string, std::uint32_t> vocab;
  std::array<std::unordered_map<BleuGram, std::vector<double>,
                                detail::GramHash<kBleuMaxOrder>>,
             kBleuMaxOrder>
      tail;
  double expected_length = 0.0;

  // Expected reference count of a token n-gram (sum over its tail).
  double expected_count(std::span<const std::string> tokens) const;
};

// Expected character n-gram counts per order and expected totals.
struct ChrfAggregate {
  std::array<std::unordered_map<ChrfGram, double, detail::GramHash<kChrfMaxOrder>>,
             kChrfMaxOrder>
      counts;
  std::array<double, kChrfMaxOrder> totals{};
};

// Weighted mean embedding.
struct DotAggregate {
  std::vector<double> mean;
};

using AggregateStats = std::variant<BleuAggregate, ChrfAggregate, DotAggregate>;

// Sentence BLEU, max order 4, whitespace tokenization, effective order
// min(4, hypothesis length); zero matches for n >= 2 are floored to 0.1.
double bleu_score(std::string_view hypothesis, std::string_view reference);

// chrF with character n-grams 1..6, beta 2, whitespace removed. Per-order
// F-scores are averaged over orders where the reference has n-grams.
double chrf_score(std::string_view hypothesis, std::string_view reference);

// Translation edit rate with greedy block shifts. Throws DataError for an
// empty reference.
double ter_score(std::string_view hypothesis, std::string_view reference);

// Feature-hashed character 3-grams (with boundary markers) into `dim`
// signed buckets, unit-normalized. Falls back to e1 when the hashed vector
// is zero. Throws ConfigError when dim < 2.
std::vector<double> hash_embed(std::string_view text, std::size_t dim,
                               std::uint64_t seed);

// Resolves sentence embeddings from a table, a hash embedder, or both
// (table first).
class EmbeddingProvider {
 public:
  struct HashOptions {
    std::size_t dim = 0;
    std::uint64_t seed = 0;
  };

  EmbeddingProvider(std::shared_ptr<const EmbeddingTable> table,
                    std::optional<HashOptions> hash);

  std::size_t dim() const { return dim_; }

  // Returns a reference to the stored vector, or fills `scratch` with the
  // hashed vector and returns it. Throws DataError naming a missing text.
  const std::vector<double>& lookup(std::string_view text,
                                    std::vector<double>& scratch) const;

  std::vector<double> embed(std::string_view text) const;

  bool has(std::string_view text) const;

 private:
  std::shared_ptr<const EmbeddingTable> table_;
  std::optional<HashOptions> hash_;
  std::size_t dim_ = 0;
};

double dot_score(std::string_view hypothesis, std::string_view reference,
                 const EmbeddingProvider& embeddings);

double qe_score(std::string_view hypothesis, std::string_view source,
                const EmbeddingProvider& embeddings);

// Utility or quality-estimation metric. Reference-free metrics receive the
// source text in place of the reference. Implementations are stateless
// after construction and safe to call concurrently.
class Metric {
 public:
  virtual ~Metric() = default;

  virtual const MetricDescriptor& descriptor() const = 0;

  virtual double score(std::string_view hypothesis,
                       std::string_view reference) const = 0;

  // Aggregation hooks; the defaults throw for non-aggregatable metrics.
  virtual AggregateStats empty_aggregate() const;
  virtual void accumulate(AggregateStats& stats, std::string_view reference,
                          double weight) const;
  virtual double score_aggregate(std::string_view hypothesis,
                                 const AggregateStats& stats) const;
};

class BleuMetric final : public Metric {
 public:
  const MetricDescriptor& descriptor() const override;
  double score(std::string_view h, std::string_view r) const override;
  AggregateStats empty_aggregate() const override;
  void accumulate(AggregateStats& stats, std::string_view reference,
                  double weight) const override;
  double score_aggregate(std::string_view h,
                         const AggregateStats& stats) const override;
};

class ChrfMetric final : public Metric {
 public:
  const MetricDescriptor& descriptor() const override;
  double score(std::string_view h, std::string_view r) const override;
  AggregateStats empty_aggregate() const override;
  void accumulate(AggregateStats& stats, std::string_view reference,
                  double weight) const override;
  double score_aggregate(std::string_view h,
                         const AggregateStats& stats) const override;
};

class TerMetric final : public Metric {
 public:
  const MetricDescriptor& descriptor() const override;
  double score(std::string_view h, std::string_view r) const override;
};

class DotMetric final : public Metric {
 public:
  explicit DotMetric(EmbeddingProvider embeddings)
      : embeddings_(std::move(embeddings)) {}
  const MetricDescriptor& descriptor() const override;
  double score(std::string_view h, std::string_view r) const override;
  AggregateStats empty_aggregate() const override;
  void accumulate(AggregateStats& stats, std::string_view reference,
                  double weight) const override;
  double score_aggregate(std::string_view h,
                         const AggregateStats& stats) const override;
  const EmbeddingProvider& embeddings() const { return embeddings_; }

 private:
  EmbeddingProvider embeddings_;
};

class QeDotMetric final : public Metric {
 public:
  explicit QeDotMetric(EmbeddingProvider embeddings)
      : embeddings_(std::move(embeddings)) {}
  const MetricDescriptor& descriptor() const override;
  double score(std::string_view h, std::string_view source) const override;

 private:
  EmbeddingProvider embeddings_;
};

struct MetricOptions {
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::optional<EmbeddingProvider::HashOptions> hash;
};

// Names: bleu, chrf, ter, dot, qe-dot.
std::unique_ptr<Metric> make_metric(std::string_view name,
                                    const MetricOptions& options = {});

// Convex combination of reference statistics; one profiled
// "metric.aggregate" block per reference. Throws ConfigError for
// non-aggregatable metrics and DataError for malformed weights.
AggregateStats aggregate(const Metric& metric,
                         std::span<const std::string> references,
                         std::span<const double> weights);

// One profiled "metric.score_aggregate" block.
double score_aggregate(const Metric& metric, std::string_view hypothesis,
                       const AggregateStats& stats);

}  // namespace mbrkit

#endif  // MBRKIT_METRICS_HPP_
