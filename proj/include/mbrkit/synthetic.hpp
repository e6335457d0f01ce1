#ifndef MBRKIT_SYNTHETIC_HPP_
#define MBRKIT_SYNTHETIC_HPP_

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "mbrkit/corpus.hpp"
#include "mbrkit/rng.hpp"

// Seeded generators for synthetic decoding problems, used by the
// self-test, the benchmark and the test suites.
namespace mbrkit::synthetic {

// "w<k>" tokens with k uniform in [0, vocab).
std::string random_sentence(std::size_t length, std::size_t vocab, Rng& rng);

// Copy of `base` where each token is independently replaced by a random
// vocabulary token with probability `noise`, then dropped with probability
// noise / 2.
std::string noisy_copy(const std::string& base, double noise, std::size_t vocab,
                       Rng& rng);

// `n` distinct sentences produced by noisy_copy of `base`, with
// per-sentence noise drawn uniformly from [0, max_noise]. A numeric suffix
// token is appended when needed to keep them distinct.
std::vector<std::string> distinct_variants(const std::string& base, std::size_t n,
                                           double max_noise, std::size_t vocab,
                                           Rng& rng);

// Standard-normal vectors (Box-Muller), unit-normalized on insertion.
std::shared_ptr<EmbeddingTable> random_embeddings(
    const std::vector<std::string>& texts, std::size_t dim, Rng& rng);

// Distinct texts get distinct basis vectors, so the dot product is the
// equality indicator.
std::shared_ptr<EmbeddingTable> one_hot_embeddings(
    const std::vector<std::string>& texts);

// Standard normal deviate.
double normal(Rng& rng);

// Instance with `n_hyps` hypotheses "h0".."h{n-1}" and `n_refs` distinct
// references "r0".."r{n-1}" plus an embedding table covering all texts.
// When `with_lprobs`, random log-scores in [-5, 0] are attached.
struct DotProblem {
  Instance instance;
  std::shared_ptr<EmbeddingTable> table;
};
DotProblem dot_problem(std::size_t n_hyps, std::size_t n_refs, std::size_t dim,
                       bool with_lprobs, Rng& rng);

// Row-major rows x cols matrix U V^T / sqrt(rank) with standard-normal
// factors U (rows x rank) and V (cols x rank).
std::vector<double> low_rank_matrix(std::size_t rows, std::size_t cols,
                                    std::size_t rank, Rng& rng);

}  // namespace mbrkit::synthetic

#endif  // MBRKIT_SYNTHETIC_HPP_
