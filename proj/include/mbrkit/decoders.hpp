#ifndef MBRKIT_DECODERS_HPP_
#define MBRKIT_DECODERS_HPP_

#include <cstddef>
#include <vector>

#include "mbrkit/config.hpp"
#include "mbrkit/corpus.hpp"
#include "mbrkit/metrics.hpp"
#include "mbrkit/rng.hpp"

namespace mbrkit {

// All MBR-family decoders work on the support set of the reference bag
// with multiplicity-folded weights. Scores of lower-is-better metrics are
// negated once when the utility matrix is built, so reported scores are
// always "higher is better". Ties go to the lower hypothesis index.

DecoderOutput decode_mbr(const Metric& metric, const Instance& instance,
                         Estimator estimator, std::size_t nbest);

// Requires an aggregatable metric.
DecoderOutput decode_rambr(const Metric& metric, const Instance& instance,
                           Estimator estimator, std::size_t nbest);

struct CentroidParams {
  std::size_t k = 64;
  std::size_t kmeans_iters = 100;
};

// Requires the dot metric. k is clamped to the number of distinct
// reference embeddings.
DecoderOutput decode_cbmbr(const Metric& metric, const Instance& instance,
                           Estimator estimator, const CentroidParams& params,
                           Rng& rng, std::size_t nbest);

struct PruneParams {
  double alpha = 0.99;
  std::size_t n_bootstrap = 500;
  std::size_t initial_refs = 8;
};

// Per-round record of the pruning schedule.
struct PruneTrace {
  std::vector<std::size_t> revealed;
  std::vector<std::vector<std::size_t>> survivors;
  std::vector<std::size_t> final_survivors;
};

DecoderOutput decode_prune(const Metric& metric, const Instance& instance,
                           Estimator estimator, const PruneParams& params,
                           Rng& rng, std::size_t nbest,
                           PruneTrace* trace = nullptr);

struct PmbrParams {
  double reduction_factor = 8.0;
  std::size_t rank = 8;
  std::size_t als_iters = 20;
  double als_reg = 0.1;
};

DecoderOutput decode_pmbr(const Metric& metric, const Instance& instance,
                          Estimator estimator, const PmbrParams& params,
                          Rng& rng, std::size_t nbest);

// N-best reranking with a reference-free metric against instance.source.
DecoderOutput rerank_qe(const Metric& metric, const Instance& instance,
                        std::size_t nbest);

// Dispatches on config.decoder.
DecoderOutput decode(const Metric& metric, const Instance& instance,
                     const Config& config, Rng& rng);

// Decodes every instance, in parallel across instances. Instance i uses
// Rng(config.seed).split(i), so results do not depend on the thread count.
// A DataError from instance i is rethrown naming that instance.
std::vector<DecoderOutput> decode_batch(const Metric& metric,
                                        const std::vector<Instance>& instances,
                                        const Config& config);

}  // namespace mbrkit

#endif  // MBRKIT_DECODERS_HPP_
