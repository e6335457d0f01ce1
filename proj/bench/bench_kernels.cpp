// Compares the OpenMP kernels against their serial references, and vanilla
// MBR against reference aggregation, on synthetic BLEU problems.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "mbrkit/decoders.hpp"
#include "mbrkit/kernels.hpp"
#include "mbrkit/metrics.hpp"
#include "mbrkit/profiler.hpp"
#include "mbrkit/synthetic.hpp"

namespace {

using namespace mbrkit;

std::vector<std::string> sentences(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::string base = synthetic::random_sentence(25, 400, rng);
  return synthetic::distinct_variants(base, n, 0.5, 400, rng);
}

void BM_ScoreMatrixSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto texts = sentences(n, 1);
  BleuMetric bleu;
  Profiler::global().set_enabled(false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_matrix_serial(bleu, texts, texts));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_ScoreMatrixParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto texts = sentences(n, 1);
  BleuMetric bleu;
  Profiler::global().set_enabled(false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_matrix(bleu, texts, texts));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
  state.counters["threads"] = omp_get_max_threads();
}

void BM_WeightedRowSumsSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  UtilityMatrix m(n, n);
  for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] = static_cast<double>(k % 97);
  const std::vector<double> w(n, 1.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_row_sums_serial(m, w));
}

void BM_WeightedRowSumsParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  UtilityMatrix m(n, n);
  for (std::size_t k = 0; k < m.values.size(); ++k) m.values[k] = static_cast<double>(k % 97);
  const std::vector<double> w(n, 1.0 / static_cast<double>(n));
  for (auto _ : state) benchmark::DoNotOptimize(weighted_row_sums(m, w));
}

void BM_DecodeMbrBleu(benchmark::State& state) {
  Instance inst;
  inst.hypotheses = sentences(static_cast<std::size_t>(state.range(0)), 2);
  inst.references = ReferenceBag(inst.hypotheses);
  BleuMetric bleu;
  Profiler::global().set_enabled(false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_mbr(bleu, inst, Estimator::kMonteCarlo, 1));
  }
}

void BM_DecodeRambrBleu(benchmark::State& state) {
  Instance inst;
  inst.hypotheses = sentences(static_cast<std::size_t>(state.range(0)), 2);
  inst.references = ReferenceBag(inst.hypotheses);
  BleuMetric bleu;
  Profiler::global().set_enabled(false);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode_rambr(bleu, inst, Estimator::kMonteCarlo, 1));
  }
}

BENCHMARK(BM_ScoreMatrixSerial)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ScoreMatrixParallel)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WeightedRowSumsSerial)->Arg(512)->Arg(2048);
BENCHMARK(BM_WeightedRowSumsParallel)->Arg(512)->Arg(2048)->UseRealTime();
BENCHMARK(BM_DecodeMbrBleu)->Arg(128)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DecodeRambrBleu)->Arg(128)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
