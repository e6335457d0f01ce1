#include "mbrkit/kernels.hpp"

#include <gtest/gtest.h>

#include <omp.h>

#include "mbrkit/error.hpp"
#include "mbrkit/profiler.hpp"
#include "mbrkit/rng.hpp"
#include "mbrkit/synthetic.hpp"
#include "support.hpp"

namespace mbrkit {
namespace {

TEST(ScoreMatrix, AllOnesForIdenticalEmbeddings) {
  auto table = std::make_shared<EmbeddingTable>(3);
  for (const char* t : {"a", "b", "c"}) table->insert(t, {1, 2, 3});
  DotMetric m(EmbeddingProvider(table, std::nullopt));
  std::vector<std::string> h{"a", "b"}, r{"a", "b", "c"};
  const auto u = score_matrix(m, h, r);
  EXPECT_EQ(u.rows, 2u);
  EXPECT_EQ(u.cols, 3u);
  for (double v : u.values) EXPECT_NEAR(v, 1.0, 1e-15);
}

TEST(ScoreMatrix, CallCount) {
  auto& prof = Profiler::global();
  prof.reset();
  BleuMetric m;
  std::vector<std::string> h{"a b", "c"}, r{"a", "b", "c d"};
  score_matrix(m, h, r);
  EXPECT_EQ(prof.calls("metric.score"), 6u);
  prof.reset();
}

TEST(ScoreMatrix, BleuDiagonal) {
  Rng rng(1);
  std::vector<std::string> s;
  for (int i = 0; i < 10; ++i) s.push_back(synthetic::random_sentence(3 + rng.below(5), 30, rng));
  const auto u = score_matrix(BleuMetric{}, s, s);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_DOUBLE_EQ(u.at(i, i), 100.0);
}

TEST(ScoreMatrix, ParallelEqualsSerial) {
  Rng rng(2);
  std::vector<std::string> h, r;
  for (int i = 0; i < 40; ++i) h.push_back(synthetic::random_sentence(2 + rng.below(10), 15, rng));
  for (int i = 0; i < 33; ++i) r.push_back(synthetic::random_sentence(2 + rng.below(10), 15, rng));
  for (const char* name : {"bleu", "chrf", "ter"}) {
    auto m = make_metric(name);
    const auto serial = score_matrix_serial(*m, h, r);
    for (int threads : {1, 2, 4}) {
      omp_set_num_threads(threads);
      const auto par = score_matrix(*m, h, r);
      EXPECT_EQ(par.values, serial.values) << name << " threads=" << threads;
      EXPECT_EQ(par.higher_better, m->descriptor().higher_better);
    }
  }
  omp_set_num_threads(omp_get_num_procs());
}

TEST(ScoreMatrix, RethrowsMetricError) {
  std::vector<std::string> h{"a", "b"}, r{"a", ""};
  EXPECT_THROW(score_matrix(TerMetric{}, h, r), DataError);
}

TEST(WeightedRowSums, ParallelEqualsSerial) {
  Rng rng(3);
  UtilityMatrix m(57, 91);
  for (double& v : m.values) v = rng.uniform(-1, 1);
  std::vector<double> w(91);
  for (double& x : w) x = rng.uniform();
  for (int threads : {1, 3}) {
    omp_set_num_threads(threads);
    EXPECT_EQ(weighted_row_sums(m, w), weighted_row_sums_serial(m, w));
  }
  omp_set_num_threads(omp_get_num_procs());
  std::vector<double> short_w(3);
  EXPECT_THROW(weighted_row_sums(m, short_w), DataError);
}

TEST(Oriented, NegatesLowerIsBetter) {
  UtilityMatrix m(1, 2, false);
  m.values = {0.5, 2.0};
  const auto o = oriented(m);
  EXPECT_TRUE(o.higher_better);
  EXPECT_EQ(o.values, (std::vector<double>{-0.5, -2.0}));
  EXPECT_EQ(oriented(o).values, o.values);
}

TEST(TopK, OrderAndTies) {
  std::vector<double> s{0.2, 0.9, 0.5, 0.9};
  EXPECT_EQ(top_k(s, 2), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(top_k(s, 3), (std::vector<std::size_t>{1, 3, 2}));
  EXPECT_EQ(top_k(s, 10).size(), 4u);
  std::vector<double> equal(5, 1.0);
  EXPECT_EQ(top_k(equal, 2), (std::vector<std::size_t>{0, 1}));
}

}  // namespace
}  // namespace mbrkit
