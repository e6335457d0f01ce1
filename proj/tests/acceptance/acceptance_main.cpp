// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "mbrkit/decoders.hpp"
#include "mbrkit/estimation.hpp"
#include "mbrkit/metrics.hpp"
#include "mbrkit/numerics.hpp"
#include "mbrkit/profiler.hpp"
#include "mbrkit/synthetic.hpp"
#include "support.hpp"

namespace {

using namespace mbrkit;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool same_idx_close_scores(const DecoderOutput& a, const DecoderOutput& b, double tol,
                           double& worst) {
  if (a.idx != b.idx) return false;
  for (std::size_t i = 0; i < a.score.size(); ++i) {
    worst = std::max(worst, std::abs(a.score[i] - b.score[i]));
  }
  return worst <= tol;
}

Outcome rambr_exactness() {
  const auto start = Clock::now();
  int mismatches = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng = Rng(1).split(s);
    const bool mb = s % 2 == 1;
    auto p = synthetic::dot_problem(64, 64, 16, true, rng);
    DotMetric m(EmbeddingProvider(p.table, std::nullopt));
    for (auto est : {Estimator::kMonteCarlo, Estimator::kModelBased}) {
      const std::size_t nbest = mb ? 5 : 1;
      if (!same_idx_close_scores(decode_rambr(m, p.instance, est, nbest),
                                 decode_mbr(m, p.instance, est, nbest), 1e-9, worst)) {
        ++mismatches;
      }
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream os;
  os << mismatches << "/400 mismatches, max |dscore| " << worst << ", " << elapsed << " s";
  return {mismatches == 0 && elapsed < 10.0, os.str()};
}

Outcome cbmbr_boundaries() {
  int mismatches = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng = Rng(2).split(s);
    const std::size_t n_refs = 8 + rng.below(40);
    auto p = synthetic::dot_problem(32, n_refs, 8, true, rng);
    DotMetric m(EmbeddingProvider(p.table, std::nullopt));
    const auto est = s % 2 == 0 ? Estimator::kMonteCarlo : Estimator::kModelBased;
    Rng a = rng.split(0), b = rng.split(1);
    double w1 = 0.0, w2 = 0.0;
    if (!same_idx_close_scores(decode_cbmbr(m, p.instance, est, {n_refs, 100}, a, 3),
                               decode_mbr(m, p.instance, est, 3), 1e-9, w1)) {
      ++mismatches;
    }
    if (!same_idx_close_scores(decode_cbmbr(m, p.instance, est, {1, 100}, b, 3),
                               decode_rambr(m, p.instance, est, 3), 1e-9, w2)) {
      ++mismatches;
    }
    worst = std::max({worst, w1, w2});
  }
  std::ostringstream os;
  os << mismatches << "/200 mismatches, max |dscore| " << worst;
  return {mismatches == 0, os.str()};
}

// argmax_h sum over bag items of (1/|bag|) [h == r], h ranging over the
// support in first-occurrence order.
std::size_t brute_force_mode(const std::vector<std::string>& bag,
                             const std::vector<std::string>& hyps) {
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    double s = 0.0;
    for (const auto& r : bag) s += (hyps[i] == r ? 1.0 : 0.0) / static_cast<double>(bag.size());
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

Outcome mode_selection() {
  Rng rng(3);
  int disagree = 0;
  testing::IndicatorMetric indicator;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t alphabet = 1 + rng.below(8);
    const std::size_t length = 1 + rng.below(20);
    std::vector<std::string> bag;
    for (std::size_t i = 0; i < length; ++i) bag.push_back("w" + std::to_string(rng.below(alphabet)));
    Instance inst;
    inst.references = ReferenceBag(bag);
    inst.hypotheses = inst.references.support();
    const auto out = decode_mbr(indicator, inst, Estimator::kMonteCarlo, 1);
    if (out.idx[0] != brute_force_mode(bag, inst.hypotheses)) ++disagree;
  }
  std::ostringstream os;
  os << 1000 - disagree << "/1000 bags agree with the brute-force oracle";
  return {disagree == 0, os.str()};
}

Outcome mc_mb_consistency() {
  int failures = 0;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng = Rng(4).split(s);
    const auto base = synthetic::random_sentence(10, 40, rng);
    Instance inst;
    inst.hypotheses = synthetic::distinct_variants(base, 16, 0.5, 40, rng);
    inst.references = ReferenceBag(synthetic::distinct_variants(base, 24, 0.5, 40, rng));
    inst.lprobs = std::vector<double>(24, rng.uniform(-10.0, 0.0));
    const auto mc = mc_weights(inst.references);
    const auto mb = mb_weights(inst.references, *inst.lprobs);
    for (std::size_t k = 0; k < mc.values.size(); ++k) {
      worst = std::max(worst, std::abs(mc.values[k] - mb.values[k]));
    }
    BleuMetric bleu;
    for (int d = 0; d < 2; ++d) {
      const auto a = d == 0 ? decode_mbr(bleu, inst, Estimator::kMonteCarlo, 3)
                            : decode_rambr(bleu, inst, Estimator::kMonteCarlo, 3);
      const auto b = d == 0 ? decode_mbr(bleu, inst, Estimator::kModelBased, 3)
                            : decode_rambr(bleu, inst, Estimator::kModelBased, 3);
      if (a.idx != b.idx || a.score != b.score) ++failures;
    }
  }
  std::ostringstream os;
  os << "max |w_mc - w_mb| " << worst << ", " << failures << "/200 differing outputs";
  return {worst <= 1e-12 && failures == 0, os.str()};
}

Outcome als_recovery() {
  constexpr std::size_t kRows = 64, kCols = 128, kRank = 4;
  int good = 0;
  std::vector<double> rmses;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng = Rng(5).split(s);
    const auto truth = synthetic::low_rank_matrix(kRows, kCols, kRank, rng);
    MaskedMatrix m{kRows, kCols, {}};
    std::vector<char> seen(kRows * kCols, 0);
    for (auto [i, j] : sample_cells(kRows, kCols, kRows * kCols / 4, rng)) {
      m.observed.push_back({i, j, truth[i * kCols + j]});
      seen[i * kCols + j] = 1;
    }
    const auto c = als_complete(m, kRank, 20, 0.1, rng);
    double se = 0.0;
    std::size_t hidden = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (seen[k]) continue;
      se += (c.values[k] - truth[k]) * (c.values[k] - truth[k]);
      ++hidden;
    }
    const double rmse = std::sqrt(se / static_cast<double>(hidden));
    rmses.push_back(rmse);
    if (rmse < 1e-2) ++good;
  }
  std::sort(rmses.begin(), rmses.end());
  std::ostringstream os;
  os << good << "/100 seeds with hidden RMSE < 1e-2 (median " << rmses[50] << ", best "
     << rmses.front() << ", worst " << rmses.back() << ")";
  return {good >= 95, os.str()};
}

Instance bleu_instance(std::size_t n_hyps, std::size_t n_refs, double noise, Rng& rng) {
  const auto base = synthetic::random_sentence(12, 50, rng);
  Instance inst;
  inst.hypotheses = synthetic::distinct_variants(base, n_hyps, noise, 50, rng);
  inst.references = ReferenceBag(synthetic::distinct_variants(base, n_refs, noise, 50, rng));
  std::vector<double> lp(n_refs);
  for (double& x : lp) x = rng.uniform(-4.0, 0.0);
  inst.lprobs = lp;
  return inst;
}

Outcome pmbr_degenerate() {
  auto& prof = Profiler::global();
  int mismatches = 0;
  int over_budget = 0;
  std::uint64_t max_calls[3] = {0, 0, 0};
  const double factors[3] = {2.0, 4.0, 8.0};
  BleuMetric bleu;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng = Rng(6).split(s);
    const auto inst = bleu_instance(32, 32, 0.6, rng);
    const auto est = s % 2 == 0 ? Estimator::kMonteCarlo : Estimator::kModelBased;
    Rng r1 = rng.split(0);
    const auto a = decode_pmbr(bleu, inst, est, {1.0, 8, 20, 0.1}, r1, 2);
    const auto b = decode_mbr(bleu, inst, est, 2);
    if (a.idx != b.idx || a.score != b.score || a.sentence != b.sentence) ++mismatches;
    for (int f = 0; f < 3; ++f) {
      prof.reset();
      Rng rf = rng.split(1 + f);
      decode_pmbr(bleu, inst, est, {factors[f], 8, 20, 0.1}, rf, 1);
      const auto calls = prof.calls("metric.score");
      max_calls[f] = std::max(max_calls[f], calls);
      if (calls > static_cast<std::uint64_t>(std::ceil(32.0 * 32.0 / factors[f]))) ++over_budget;
    }
  }
  prof.reset();
  std::ostringstream os;
  os << mismatches << "/100 r=1 mismatches; max metric calls r=2,4,8: " << max_calls[0]
     << "/" << 512 << ", " << max_calls[1] << "/" << 256 << ", " << max_calls[2] << "/" << 128;
  return {mismatches == 0 && over_budget == 0, os.str()};
}

Outcome prune_agreement() {
  int agree = 0;
  BleuMetric bleu;
  for (std::uint64_t s = 0; s < 100; ++s) {
    Rng rng = Rng(7).split(s);
    const auto inst = bleu_instance(64, 256, 0.7, rng);
    Rng r2 = rng.split(0);
    const auto pruned = decode_prune(bleu, inst, Estimator::kMonteCarlo, {0.99, 500, 8}, r2, 1);
    if (pruned.idx[0] == decode_mbr(bleu, inst, Estimator::kMonteCarlo, 1).idx[0]) ++agree;
  }
  int dominance_ok = 0;
  constexpr int kDominance = 100;
  for (std::uint64_t s = 0; s < kDominance; ++s) {
    Rng rng = Rng(70).split(s);
    testing::TableMetric m;
    Instance inst;
    const std::size_t nh = 8 + rng.below(57), nr = 16 + rng.below(241);
    for (std::size_t i = 0; i < nh; ++i) inst.hypotheses.push_back("h" + std::to_string(i));
    std::vector<std::string> refs;
    for (std::size_t j = 0; j < nr; ++j) refs.push_back("r" + std::to_string(j));
    inst.references = ReferenceBag(refs);
    const std::size_t star = rng.below(nh);
    for (std::size_t j = 0; j < nr; ++j) {
      double row_max = 0.0;
      for (std::size_t i = 0; i < nh; ++i) {
        if (i == star) continue;
        const double v = rng.uniform();
        m.set(inst.hypotheses[i], refs[j], v);
        row_max = std::max(row_max, v);
      }
      m.set(inst.hypotheses[star], refs[j], row_max + 1e-3 + rng.uniform() * 0.1);
    }
    PruneTrace trace;
    Rng r2 = rng.split(0);
    const auto out = decode_prune(m, inst, Estimator::kMonteCarlo, {0.99, 500, 8}, r2, 1, &trace);
    bool ok = out.idx[0] == star;
    for (const auto& round : trace.survivors) {
      ok = ok && std::find(round.begin(), round.end(), star) != round.end();
    }
    if (ok) ++dominance_ok;
  }
  std::ostringstream os;
  os << "top-1 agreement " << agree << "/100, dominance kept " << dominance_ok << "/"
     << kDominance;
  return {agree >= 90 && dominance_ok == kDominance, os.str()};
}

Outcome complexity() {
  auto& prof = Profiler::global();
  Rng rng(8);
  const auto inst = bleu_instance(512, 512, 0.6, rng);
  BleuMetric bleu;

  prof.reset();
  auto start = Clock::now();
  const auto vanilla = decode_mbr(bleu, inst, Estimator::kMonteCarlo, 1);
  const double t_mbr = seconds_since(start);
  const auto mbr_calls = prof.calls("metric.score");

  prof.reset();
  start = Clock::now();
  const auto fast = decode_rambr(bleu, inst, Estimator::kMonteCarlo, 1);
  const double t_rambr = seconds_since(start);
  const auto agg_calls = prof.calls("metric.aggregate");
  const auto score_calls = prof.calls("metric.score_aggregate");
  const auto pairwise = prof.calls("metric.score");
  prof.reset();

  const double speedup = t_mbr / t_rambr;
  std::ostringstream os;
  os << "MBR " << t_mbr << " s (" << mbr_calls << " calls), RAMBR " << t_rambr << " s ("
     << agg_calls << "+" << score_calls << " calls), speedup " << speedup << "x";
  const bool counts = mbr_calls == 512u * 512u && agg_calls == 512 && score_calls == 512 &&
                      pairwise == 0;
  (void)vanilla;
  (void)fast;
  return {counts && speedup >= 5.0 && t_mbr + t_rambr < 120.0, os.str()};
}

Outcome profiler_schema() {
  Profiler p;
  BleuMetric bleu;
  volatile double sink = 0.0;
  for (int i = 0; i < 10000; ++i) {
    auto scope = p.measure("bleu");
    sink = sink + bleu.score("the cat sat on the mat", "the cat sat on a mat");
  }
  const auto records = p.aggregate_and_report(1);
  const auto j = to_json(records);
  bool ok = j.size() == 1;
  if (ok) {
    std::vector<std::string> keys;
    for (auto it = j[0].begin(); it != j[0].end(); ++it) keys.push_back(it.key());
    ok = keys == std::vector<std::string>{"name", "acctime", "acccalls", "ms/call",
                                          "ms/sentence", "calls/sentence"};
    const auto& r = records[0];
    const double rel = 1e-12;
    ok = ok && r.acccalls == 10000 && r.acctime > 0.0 &&
         std::abs(r.ms_per_call - 1000.0 * r.acctime / 10000.0) <= rel * r.ms_per_call &&
         std::abs(r.ms_per_sentence - 1000.0 * r.acctime) <= rel * r.ms_per_sentence &&
         r.calls_per_sentence == 10000.0;
  }
  return {ok, j.dump()};
}

std::string run_cli(const std::string& args, int* status) {
  const std::string cmd = std::string(MBRKIT_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    *status = -1;
    return "";
  }
  std::string out;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  *status = pclose(pipe);
  return out;
}

Outcome reproducibility() {
  const std::string data = MBRKIT_TEST_DATA;
  const std::string emb = " --embeddings " + data + "/embeddings.jsonl";
  const std::vector<std::string> cases = {
      "--decoder mbr --metric bleu --nbest 3",
      "--decoder mbr --metric ter --estimator mb",
      "--decoder rambr --metric chrf --estimator mb",
      "--decoder prune --metric bleu --set initial_refs=2 --set n_bootstrap=100",
      "--decoder pmbr --metric chrf --set reduction_factor=2 --set rank=2",
      "--decoder cbmbr --metric dot --set k=3" + emb,
      "--decoder rerank --metric qe-dot" + emb,
  };
  int failures = 0;
  for (const auto& c : cases) {
    const std::string base =
        "--input " + data + "/sample.jsonl --output-format jsonl --seed 42 " + c;
    int s1 = 0, s2 = 0, s3 = 0;
    const auto a = run_cli(base + " --threads 1", &s1);
    const auto b = run_cli(base + " --threads 1", &s2);
    const auto d = run_cli(base + " --threads 4", &s3);
    if (s1 != 0 || s2 != 0 || s3 != 0 || a.empty() || a != b || a != d) {
      ++failures;
      std::cerr << "  differs or failed: " << c << "\n";
    }
  }
  std::ostringstream os;
  os << cases.size() - failures << "/" << cases.size()
     << " invocations byte-identical across repeats and --threads {1,4}";
  return {failures == 0, os.str()};
}

Outcome metric_identities() {
  Rng rng(11);
  int failures = 0;
  for (int t = 0; t < 1000; ++t) {
    const auto s = synthetic::random_sentence(1 + rng.below(25), 1 + rng.below(200), rng);
    if (bleu_score(s, s) != 100.0 || chrf_score(s, s) != 100.0 || ter_score(s, s) != 0.0) {
      ++failures;
    }
  }
  const double example = bleu_score("the cat sat on the mat today", "the cat sat on the mat");
  std::ostringstream os;
  os << failures << "/1000 identity failures, BLEU example " << example;
  return {failures == 0 && std::abs(example - 80.91) <= 0.01, os.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"rambr-exactness", rambr_exactness},
      {"cbmbr-boundaries", cbmbr_boundaries},
      {"mode-selection", mode_selection},
      {"mc-mb-consistency", mc_mb_consistency},
      {"als-recovery", als_recovery},
      {"pmbr-degenerate", pmbr_degenerate},
      {"prune-agreement", prune_agreement},
      {"complexity", complexity},
      {"profiler-schema", profiler_schema},
      {"reproducibility", reproducibility},
      {"metric-identities", metric_identities},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << ": "
              << o.detail << std::endl;
    if (!o.passed) ++failed;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
