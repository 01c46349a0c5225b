#include "seqstop/prior.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace seqstop {

namespace {

void check_common(const std::vector<double>& p) {
    if (p.empty()) throw std::invalid_argument("prior: empty probability vector");
    double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::fabs(sum - 1.0) > kProbSumTolerance)
        throw std::invalid_argument("prior: probabilities sum to " + std::to_string(sum) + ", expected 1");
    for (size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || p[i] > 1.0)
            throw std::invalid_argument("prior: entry " + std::to_string(i) + " outside [0,1]");
        if (i > 0 && p[i] > p[i - 1])
            throw std::invalid_argument("prior: entries must be non-increasing");
    }
}

// breaks p1 == p2 by nudging the two ends of the leading tied group
bool apply_tie_policy(std::vector<double>& p, TiePolicy tie) {
    if (p.size() < 2 || p[0] > p[1]) return false;
    if (tie == TiePolicy::reject)
        throw std::invalid_argument("prior: p1 == p2 violates the strict mode requirement");
    size_t last = 1;
    while (last + 1 < p.size() && p[last + 1] == p[0]) ++last;
    p[0] += kTieJitter;
    p[last] -= kTieJitter;
    return true;
}

}  // namespace

Prior Prior::known(std::vector<double> probs, TiePolicy tie) {
    check_common(probs);
    for (size_t i = 0; i < probs.size(); ++i)
        if (probs[i] <= 0.0)
            throw std::invalid_argument("prior: known-prior mode requires all entries > 0");
    bool jittered = apply_tie_policy(probs, tie);
    return Prior(std::move(probs), jittered);
}

Prior Prior::candidate(std::vector<double> probs, TiePolicy tie) {
    check_common(probs);
    bool jittered = apply_tie_policy(probs, tie);
    return Prior(std::move(probs), jittered);
}

int Prior::support() const {
    int s = 0;
    for (double p : probs_)
        if (p > 0.0) ++s;
    return s;
}

Prior Prior::padded(int k) const {
    if (k < size()) throw std::invalid_argument("prior: cannot pad to fewer slots");
    std::vector<double> p = probs_;
    p.resize(static_cast<size_t>(k), 0.0);
    return Prior(std::move(p), jittered_);
}

HyperPrior make_hyper_prior(std::vector<Prior> candidates, std::vector<double> weights) {
    if (candidates.empty()) throw std::invalid_argument("hyper-prior: no candidates");
    int k = 0;
    for (const Prior& c : candidates) k = std::max(k, c.size());
    for (Prior& c : candidates)
        if (c.size() < k) c = c.padded(k);

    int m = static_cast<int>(candidates.size());
    if (weights.empty()) weights.assign(static_cast<size_t>(m), 1.0 / m);
    if (static_cast<int>(weights.size()) != m)
        throw std::invalid_argument("hyper-prior: weight count does not match candidate count");
    double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (std::fabs(sum - 1.0) > kProbSumTolerance)
        throw std::invalid_argument("hyper-prior: weights sum to " + std::to_string(sum) + ", expected 1");
    for (double w : weights)
        if (w < 0.0 || w > 1.0) throw std::invalid_argument("hyper-prior: weight outside [0,1]");

    return HyperPrior{std::move(candidates), std::move(weights)};
}

}  // namespace seqstop
