#include "mbrkit/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mbrkit/decoders.hpp"
#include "mbrkit/metrics.hpp"
#include "mbrkit/numerics.hpp"
#include "mbrkit/synthetic.hpp"

namespace mbrkit {
namespace {

bool same_output(const DecoderOutput& a, const DecoderOutput& b, double tol,
                 double* worst) {
  if (a.idx != b.idx) return false;
  for (std::size_t i = 0; i < a.score.size(); ++i) {
    *worst = std::max(*worst, std::abs(a.score[i] - b.score[i]));
  }
  return *worst <= tol;
}

SelfTestResult rambr_exactness(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  int failures = 0;
  constexpr int kTrials = 20;
  for (int t = 0; t < kTrials; ++t) {
    for (bool mb : {false, true}) {
      auto p = synthetic::dot_problem(16, 16, 8, mb, rng);
      DotMetric metric(EmbeddingProvider(p.table, std::nullopt));
      const Estimator est = mb ? Estimator::kModelBased : Estimator::kMonteCarlo;
      const auto a = decode_mbr(metric, p.instance, est, 3);
      const auto b = decode_rambr(metric, p.instance, est, 3);
      if (!same_output(a, b, 1e-9, &worst)) ++failures;
    }
  }
  std::ostringstream os;
  os << failures << "/" << 2 * kTrials << " mismatches, max |Δscore| " << worst;
  return {"rambr-exactness", failures == 0, os.str()};
}

SelfTestResult cbmbr_boundary(std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  int failures = 0;
  constexpr int kTrials = 20;
  for (int t = 0; t < kTrials; ++t) {
    auto p = synthetic::dot_problem(12, 10, 6, t % 2 == 1, rng);
    DotMetric metric(EmbeddingProvider(p.table, std::nullopt));
    const Estimator est = t % 2 == 1 ? Estimator::kModelBased : Estimator::kMonteCarlo;
    Rng r1 = rng.split(2 * t);
    Rng r2 = rng.split(2 * t + 1);
    const auto full = decode_cbmbr(metric, p.instance, est, {10, 100}, r1, 2);
    const auto one = decode_cbmbr(metric, p.instance, est, {1, 100}, r2, 2);
    if (!same_output(full, decode_mbr(metric, p.instance, est, 2), 1e-9, &worst)) {
      ++failures;
    }
    if (!same_output(one, decode_rambr(metric, p.instance, est, 2), 1e-9, &worst)) {
      ++failures;
    }
  }
  std::ostringstream os;
  os << failures << "/" << 2 * kTrials << " mismatches, max |Δscore| " << worst;
  return {"cbmbr-boundary", failures == 0, os.str()};
}

SelfTestResult als_recovery(std::uint64_t seed) {
  constexpr std::size_t kRows = 64, kCols = 128, kRank = 4;
  constexpr int kTrials = 10;
  int good = 0;
  double worst = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    Rng rng = Rng(seed).split(t);
    const auto truth = synthetic::low_rank_matrix(kRows, kCols, kRank, rng);
    const auto cells = sample_cells(kRows, kCols, kRows * kCols / 4, rng);
    MaskedMatrix m{kRows, kCols, {}};
    std::vector<char> seen(kRows * kCols, 0);
    for (auto [i, j] : cells) {
      m.observed.push_back({i, j, truth[i * kCols + j]});
      seen[i * kCols + j] = 1;
    }
    const auto c = als_complete(m, kRank, 20, 0.1, rng);
    double se = 0.0;
    std::size_t hidden = 0;
    for (std::size_t k = 0; k < truth.size(); ++k) {
      if (seen[k]) continue;
      const double d = c.values[k] - truth[k];
      se += d * d;
      ++hidden;
    }
    const double rmse = std::sqrt(se / static_cast<double>(hidden));
    worst = std::max(worst, rmse);
    if (rmse < 1e-2) ++good;
  }
  std::ostringstream os;
  os << good << "/" << kTrials << " seeds with hidden RMSE < 1e-2, worst " << worst;
  return {"als-recovery", good * 100 >= 95 * kTrials, os.str()};
}

SelfTestResult mode_selection(std::uint64_t seed) {
  Rng rng(seed);
  constexpr int kTrials = 100;
  int failures = 0;
  for (int t = 0; t < kTrials; ++t) {
    const std::size_t alphabet = 2 + rng.below(5);
    const std::size_t length = 1 + rng.below(12);
    std::vector<std::string> bag;
    for (std::size_t i = 0; i < length; ++i) {
      bag.push_back("t" + std::to_string(rng.below(alphabet)));
    }
    Instance inst;
    inst.references = ReferenceBag(bag);
    inst.hypotheses = inst.references.support();
    DotMetric metric(EmbeddingProvider(synthetic::one_hot_embeddings(bag), std::nullopt));
    const auto out = decode_mbr(metric, inst, Estimator::kMonteCarlo, 1);
    const auto& m = inst.references.multiplicity();
    const auto best = static_cast<std::size_t>(
        std::max_element(m.begin(), m.end()) - m.begin());
    if (out.idx.front() != best) ++failures;
  }
  std::ostringstream os;
  os << failures << "/" << kTrials << " bags where the mode was not selected";
  return {"mode-selection", failures == 0, os.str()};
}

}  // namespace

const std::vector<SelfTestProperty>& selftest_properties() {
  static const std::vector<SelfTestProperty> props = {
      {"rambr-exactness", rambr_exactness},
      {"cbmbr-boundary", cbmbr_boundary},
      {"als-recovery", als_recovery},
      {"mode-selection", mode_selection},
  };
  return props;
}

}  // namespace mbrkit
