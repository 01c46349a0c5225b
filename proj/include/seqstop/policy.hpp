#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>

#include "seqstop/count_state.hpp"
#include "seqstop/posterior.hpp"
#include "seqstop/prior.hpp"

namespace seqstop {

// prior-free baseline (ASC Beta stopping rule)
struct PriorFree {};

using PriorSource = std::variant<PriorFree, Prior, HyperPrior>;

struct StoppingConfig {
    double delta = 0.05;              // risk in (0, 1/2)
    std::optional<int> aggregation;   // L >= 2; nullopt = exact posterior
    int max_samples = 100;            // truncation cutoff
    uint64_t seed = 0;                // tie-break RNG seed
    PriorSource prior_source;
    bool allow_large_k = false;       // forwarded to the exact posterior

    void validate() const;
};

struct StopOutcome {
    int stop_time = 0;               // samples consumed
    int chosen = -1;                 // tie-broken most frequent answer token
    double final_confidence = 0.0;   // posterior at stop (or at truncation)
    bool truncated = false;          // hit max_samples below threshold
    double eval_time_ms = 0.0;       // time spent in posterior evaluation
};

using AnswerStream = std::function<int()>;

// Sequential threshold rule: draw, update counts, stop at the first n whose
// configured posterior reaches 1 - delta (or at max_samples, flagged).
StopOutcome run_policy(const StoppingConfig& config, const AnswerStream& stream);

// Confidence the configured posterior assigns to the current leader; exposed
// for step-by-step cross-checks.
double policy_confidence(const StoppingConfig& config, const CountState& state);

// K = 2 closed form: stop once v1 - v2 reaches
// ceil(log((1-delta)/delta) / log(p1/(1-p1))).  Requires p1 > 1/2.
int k2_threshold(double p1, double delta);

// ASC baseline: stop iff P(X > 1/2) >= 1 - delta for
// X ~ Beta(v1 + 1, v2 + 1), v2 the runner-up count (0 if none).
bool asc_stop(const CountState& state, double delta);
double asc_confidence(const CountState& state);

// P(X > 1/2) for X ~ Beta(a, b) with integer a, b >= 1, via the exact
// binomial tail identity for the regularized incomplete beta function.
double beta_tail_above_half(int a, int b);

}  // namespace seqstop
