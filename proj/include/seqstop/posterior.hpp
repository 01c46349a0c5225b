#pragma once

#include <stdexcept>
#include <vector>

#include "seqstop/count_state.hpp"
#include "seqstop/prior.hpp"

namespace seqstop {

// Observations are impossible under the model (e.g. more distinct answers
// than the prior has support for).
class model_violation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PosteriorResult {
    double p_mode = 0.0;  // P(tie-broken most frequent observed answer is a_1)
    double log_numerator = 0.0;
    double log_denominator = 0.0;
};

// K above which the exact injective-assignment sum is refused unless
// explicitly overridden (cost grows as K!/(K-M)!).
inline constexpr int kExactPosteriorMaxK = 12;
// hard ceiling even with the override: the subset tables hold 2^K doubles
inline constexpr int kExactPosteriorHardMaxK = 20;

// P(H_1 | C_n) per the injective-map likelihood ratio with psi(1) = 1 in the
// numerator.  Exact for any K, intended for small K / oracle duty.
PosteriorResult exact_posterior(const Prior& prior, const CountState& state,
                                bool allow_large_k = false);

// Debug surface: P(H_i | C_n) for every observed frequency level i = 1..q
// (the hypothesis that a specific tie-broken answer at that level is a_1).
std::vector<double> hypothesis_posteriors(const Prior& prior, const CountState& state,
                                          bool allow_large_k = false);

// P(H_1 | C_n^L): injective maps over the tracked head only, each weighted by
// the tie-corrected tail constant S~_psi.  Recovers exact_posterior when the
// head captures all distinct answers and the residual is zero.
PosteriorResult aggregated_posterior(const Prior& prior, const AggregatedCountState& agg);

// Hyper-prior mixtures: lambda-weighted numerator and denominator sums across
// candidates.  Candidates whose support cannot produce the observations
// contribute zero likelihood naturally.
PosteriorResult mixture_posterior(const HyperPrior& hyper, const CountState& state,
                                  bool allow_large_k = false);
PosteriorResult mixture_aggregated_posterior(const HyperPrior& hyper,
                                             const AggregatedCountState& agg);

}  // namespace seqstop
