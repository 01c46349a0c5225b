#pragma once

#include <optional>
#include <span>
#include <vector>

#include "seqstop/prior.hpp"

namespace seqstop {

// KL divergence between Bern(a) and Bern(b), natural log.  Requires a, b in
// the open unit interval.
double kl_bernoulli(double a, double b);

// Sum a_i ln(a_i / b_i) with 0 ln 0 = 0; returns +inf when some b_i = 0 with
// a_i > 0.  Vectors must have equal length.
double kl_categorical(std::span<const double> a, std::span<const double> b);

// Limit of E[stopping time] / log(1/delta) as delta -> 0, with the
// per-candidate exponents for the uncertain-prior case.
struct RateReport {
    double rate = 0.0;
    std::optional<int> argmin_index;  // m-dagger, 0-based (uncertain case only)
    std::vector<double> components;   // per-candidate J values (uncertain case only)
    bool argmin_tie = false;
};

// Known prior.  L = 2 gives 1 / KL(p1 || p2); every L >= 3 gives
// 1 / ((p1 - p2) ln(p1 / p2)), the exact-posterior rate.
RateReport rate_known(const Prior& prior, int aggregation_level);

// Prior-free baseline rate 1 / (p1 ln(2 p1/(p1+p2)) + p2 ln(2 p2/(p1+p2))).
RateReport rate_prior_free(const Prior& prior);

// Uncertain prior: rate = 1 / J at the binding candidate m-dagger, where the
// J exponent is the KL divergence of the truth against the candidate with its
// top two slots swapped, plus a tail-confusion correction gated by the
// rho indicators.  Components report every candidate's J; ties in the argmin
// resolve to the lowest index and are flagged.
RateReport rate_uncertain(const Prior& truth, const HyperPrior& hyper, int aggregation_level);

}  // namespace seqstop
