#include "mbrkit/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mbrkit/error.hpp"

namespace mbrkit {

Weights mc_weights(const ReferenceBag& bag) {
  if (bag.empty()) throw DataError("cannot estimate weights of an empty bag");
  Weights w;
  w.kind = Estimator::kMonteCarlo;
  const double total = static_cast<double>(bag.size());
  w.values.reserve(bag.support().size());
  for (int m : bag.multiplicity()) w.values.push_back(static_cast<double>(m) / total);
  return w;
}

Weights mb_weights(const ReferenceBag& bag, std::span<const double> lprobs) {
  if (bag.empty()) throw DataError("cannot estimate weights of an empty bag");
  if (lprobs.size() != bag.size()) {
    throw DataError("lprobs length " + std::to_string(lprobs.size()) +
                    " ≠ bag length " + std::to_string(bag.size()));
  }
  const std::size_t n = bag.support().size();
  std::vector<double> support_lp(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < lprobs.size(); ++i) {
    const std::size_t k = bag.support_index_of_item(i);
    if (std::isnan(support_lp[k])) {
      support_lp[k] = lprobs[i];
    } else if (std::abs(support_lp[k] - lprobs[i]) > 1e-6) {
      throw DataError("reference '" + bag.support()[k] +
                      "' appears with different lprobs (" +
                      std::to_string(support_lp[k]) + " vs " +
                      std::to_string(lprobs[i]) + ")");
    }
  }
  const double max_lp = *std::max_element(support_lp.begin(), support_lp.end());
  Weights w;
  w.kind = Estimator::kModelBased;
  w.values.resize(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    w.values[k] = std::exp(support_lp[k] - max_lp);
    total += w.values[k];
  }
  for (double& v : w.values) v /= total;
  return w;
}

Weights estimate_weights(const Instance& instance, Estimator estimator) {
  if (estimator == Estimator::kMonteCarlo) return mc_weights(instance.references);
  if (!instance.lprobs) {
    throw DataError("model-based estimation requires 'lprobs' in the input");
  }
  return mb_weights(instance.references, *instance.lprobs);
}

std::vector<double> expected_scores(const UtilityMatrix& matrix,
                                    const Weights& weights) {
  return weighted_row_sums(matrix, weights.values);
}

}  // namespace mbrkit
