#include "mbrkit/config.hpp"

#include <gtest/gtest.h>

#include "mbrkit/error.hpp"

namespace mbrkit {
namespace {

std::string config_error(std::string_view yaml, const ConfigOverrides& o = {}) {
  try {
    load_config_text(yaml, o);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, Defaults) {
  const auto c = load_config_text("{decoder: mbr, metric: bleu}");
  EXPECT_EQ(c.decoder, "mbr");
  EXPECT_EQ(c.metric, "bleu");
  EXPECT_EQ(c.estimator, Estimator::kMonteCarlo);
  EXPECT_EQ(c.nbest, 1u);
  EXPECT_EQ(c.seed, 0u);
  EXPECT_EQ(c, load_config(nullptr));
}

TEST(Config, OverrideWins) {
  const auto c = load_config_text("seed: 1\n", {{"seed", "7"}});
  EXPECT_EQ(c.seed, 7u);
}

TEST(Config, KMustBePositive) {
  const auto msg = config_error("{decoder: cbmbr, metric: dot, hash_dim: 8, k: 0}");
  EXPECT_NE(msg.find("k must be ≥ 1"), std::string::npos) << msg;
}

TEST(Config, AllKeys) {
  const auto c = load_config_text(R"(
metric: chrf
decoder: pmbr
estimator: mb
nbest: 3
seed: 18446744073709551615
k: 5
kmeans_iters: 7
reduction_factor: 2.5
rank: 3
als_iters: 9
als_reg: 0.5
alpha: 0.9
n_bootstrap: 11
initial_refs: 4
hash_dim: 16
hash_seed: 2
)");
  EXPECT_EQ(c.metric, "chrf");
  EXPECT_EQ(c.decoder, "pmbr");
  EXPECT_EQ(c.estimator, Estimator::kModelBased);
  EXPECT_EQ(c.nbest, 3u);
  EXPECT_EQ(c.seed, 18446744073709551615ULL);
  EXPECT_EQ(c.k, 5u);
  EXPECT_EQ(c.kmeans_iters, 7u);
  EXPECT_DOUBLE_EQ(c.reduction_factor, 2.5);
  EXPECT_EQ(c.rank, 3u);
  EXPECT_EQ(c.als_iters, 9u);
  EXPECT_DOUBLE_EQ(c.als_reg, 0.5);
  EXPECT_DOUBLE_EQ(c.alpha, 0.9);
  EXPECT_EQ(c.n_bootstrap, 11u);
  EXPECT_EQ(c.initial_refs, 4u);
  EXPECT_EQ(c.hash_dim, 16u);
  EXPECT_EQ(c.hash_seed, 2u);
}

TEST(Config, Errors) {
  EXPECT_NE(config_error("bogus: 1").find("unknown config key 'bogus'"), std::string::npos);
  EXPECT_NE(config_error("nbest: two").find("nbest"), std::string::npos);
  EXPECT_NE(config_error("nbest: -1").find("nbest"), std::string::npos);
  EXPECT_NE(config_error("nbest: 1.5").find("nbest"), std::string::npos);
  EXPECT_NE(config_error("estimator: xx").find("estimator"), std::string::npos);
  EXPECT_NE(config_error("alpha: 1.0").find("alpha"), std::string::npos);
  EXPECT_NE(config_error("reduction_factor: 0.5").find("reduction_factor"), std::string::npos);
  EXPECT_NE(config_error("als_reg: -1").find("als_reg"), std::string::npos);
  EXPECT_NE(config_error("hash_dim: 1").find("hash_dim"), std::string::npos);
  EXPECT_NE(config_error("metric: meteor").find("meteor"), std::string::npos);
  EXPECT_NE(config_error("decoder: beam").find("beam"), std::string::npos);
  EXPECT_NE(config_error("[1, 2]"), "");
  EXPECT_NE(config_error("a: [").find("malformed"), std::string::npos);
  EXPECT_NE(config_error("", {{"typo", "1"}}), "");
}

TEST(Config, CrossKeyRules) {
  const auto cb = config_error("decoder: cbmbr\nmetric: dot\n");
  EXPECT_NE(cb.find("cbmbr"), std::string::npos);
  EXPECT_NE(cb.find("embeddings"), std::string::npos);
  EXPECT_NE(config_error("{decoder: cbmbr, metric: bleu, hash_dim: 4}"), "");
  EXPECT_NE(config_error("metric: dot"), "");
  EXPECT_NE(config_error("{decoder: rerank, metric: bleu}"), "");
  EXPECT_NE(config_error("{decoder: mbr, metric: qe-dot, hash_dim: 4}"), "");
  EXPECT_NE(config_error("{decoder: rambr, metric: ter}"), "");
  EXPECT_EQ(config_error("{decoder: rambr, metric: chrf}"), "");
  EXPECT_EQ(config_error("{decoder: rerank, metric: qe-dot, embedding_path: e.jsonl}"), "");
  EXPECT_EQ(config_error("{decoder: cbmbr, metric: dot, hash_dim: 4}"), "");
}

TEST(Config, EstimatorNames) {
  EXPECT_EQ(to_string(Estimator::kMonteCarlo), "mc");
  EXPECT_EQ(to_string(Estimator::kModelBased), "mb");
}

}  // namespace
}  // namespace mbrkit
