#pragma once

#include <vector>

#include "seqstop/scaled.hpp"

namespace seqstop {

// Inputs for the aggregated tail likelihood constants.  `tail_probs` are the
// prior entries outside the tracked head; each untracked label may absorb at
// most `cap` of the `residual` pooled samples.
struct TailSpec {
    std::vector<double> tail_probs;
    int cap = 1;             // v_d
    int head_tie_count = 1;  // c'_d (weighted variant only)
    int residual = 0;        // n-bar

    void validate() const;
};

// S_psi: residual! * [z^residual] prod_j sum_{r<=cap} (p_j z)^r / r!,
// i.e. the total likelihood of distributing the pooled samples among the
// untracked labels with a per-label cap and no tie correction.  Computed by
// per-label polynomial convolution; returns exact zero when the caps cannot
// absorb the residual.
ScaledValue tail_sum(const TailSpec& spec);

// S~_psi: as tail_sum but each allocation weighted by
// w(r) = 1 / binom(c'_d + m(r), c'_d) with m(r) the number of tail labels
// hitting the cap, removing the double count of head/tail splits among
// answers tied at the cutoff frequency.  The DP tracks the cap-hit count in
// a second dimension.
ScaledValue tilde_tail_sum(const TailSpec& spec);

// Direct enumeration over allocation vectors; the oracle for both DP
// routines.  Throws when the instance exceeds `budget` enumeration steps.
double tail_sum_bruteforce(const TailSpec& spec, bool weighted, long long budget = 10'000'000);

}  // namespace seqstop
