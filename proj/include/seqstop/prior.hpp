#pragma once

#include <stdexcept>
#include <vector>

namespace seqstop {

// What to do when ingested data yields p1 == p2.  Theory requires a strict
// mode; real frequency data may tie.
enum class TiePolicy {
    reject,  // throw
    jitter,  // +/- 1e-9 on the tied ends of the leading group, flagged
};

inline constexpr double kProbSumTolerance = 1e-12;
inline constexpr double kTieJitter = 1e-9;

// Sorted probability vector over K anonymous answer slots.  Immutable after
// construction.  Known-prior mode requires every entry positive; candidate
// mode (hyper-prior members) permits trailing zeros from support padding.
class Prior {
public:
    // all entries > 0, p1 > p2 strictly (or jittered per policy)
    static Prior known(std::vector<double> probs, TiePolicy tie = TiePolicy::reject);
    // trailing zeros allowed (padded "null" answers)
    static Prior candidate(std::vector<double> probs, TiePolicy tie = TiePolicy::reject);

    int size() const { return static_cast<int>(probs_.size()); }  // K
    double operator[](int i) const { return probs_[static_cast<size_t>(i)]; }
    const std::vector<double>& probs() const { return probs_; }

    // number of strictly positive entries
    int support() const;
    // copy zero-padded to k entries (k >= size); for hyper-prior alignment
    Prior padded(int k) const;
    // true when tie jitter was applied during construction
    bool jittered() const { return jittered_; }

private:
    Prior(std::vector<double> probs, bool jittered) : probs_(std::move(probs)), jittered_(jittered) {}

    std::vector<double> probs_;
    bool jittered_ = false;
};

// Finite set of candidate priors with mixture weights; all candidates share
// the same K after construction.
struct HyperPrior {
    std::vector<Prior> candidates;
    std::vector<double> weights;

    int size() const { return static_cast<int>(candidates.size()); }  // M
    int num_slots() const { return candidates.empty() ? 0 : candidates.front().size(); }  // K
};

// Pads candidates to a common K and validates weights (uniform when empty).
HyperPrior make_hyper_prior(std::vector<Prior> candidates, std::vector<double> weights = {});

}  // namespace seqstop
