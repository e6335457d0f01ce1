#ifndef MBRKIT_ESTIMATION_HPP_
#define MBRKIT_ESTIMATION_HPP_

#include <span>
#include <vector>

#include "mbrkit/config.hpp"
#include "mbrkit/corpus.hpp"
#include "mbrkit/kernels.hpp"

namespace mbrkit {

// Probability vector over ReferenceBag::support().
struct Weights {
  std::vector<double> values;
  Estimator kind = Estimator::kMonteCarlo;
};

// Empirical distribution: multiplicity / bag size.
Weights mc_weights(const ReferenceBag& bag);

// Softmax of the log-scores over the support set, shifted by the maximum.
// `lprobs` is aligned with bag.items(); repeated items must carry the same
// score (to within 1e-6).
Weights mb_weights(const ReferenceBag& bag, std::span<const double> lprobs);

// Weights for `instance` under `estimator`; mb requires instance.lprobs.
Weights estimate_weights(const Instance& instance, Estimator estimator);

// mu_i = sum_j w_j * u(h_i, r_j), accumulated in ascending j.
std::vector<double> expected_scores(const UtilityMatrix& matrix,
                                    const Weights& weights);

}  // namespace mbrkit

#endif  // MBRKIT_ESTIMATION_HPP_
