#include "seqstop/policy.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "seqstop/stream.hpp"

namespace seqstop {

void StoppingConfig::validate() const {
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("stopping config: delta must lie in (0, 0.5)");
    if (aggregation && *aggregation < 2)
        throw std::invalid_argument("stopping config: aggregation level must be >= 2");
    if (max_samples < 1)
        throw std::invalid_argument("stopping config: max_samples must be >= 1");
}

double policy_confidence(const StoppingConfig& config, const CountState& state) {
    struct Visitor {
        const StoppingConfig& cfg;
        const CountState& st;

        double operator()(const PriorFree&) const { return asc_confidence(st); }
        double operator()(const Prior& prior) const {
            if (cfg.aggregation)
                return aggregated_posterior(prior, condense(st, *cfg.aggregation)).p_mode;
            return exact_posterior(prior, st, cfg.allow_large_k).p_mode;
        }
        double operator()(const HyperPrior& hyper) const {
            if (cfg.aggregation)
                return mixture_aggregated_posterior(hyper, condense(st, *cfg.aggregation)).p_mode;
            return mixture_posterior(hyper, st, cfg.allow_large_k).p_mode;
        }
    };
    return std::visit(Visitor{config, state}, config.prior_source);
}

StopOutcome run_policy(const StoppingConfig& config, const AnswerStream& stream) {
    config.validate();
    const double target = 1.0 - config.delta;

    TrialTally tally;
    StopOutcome out;
    double eval_ns = 0.0;

    for (int n = 1; n <= config.max_samples; ++n) {
        tally.observe(stream());
        const auto t0 = std::chrono::steady_clock::now();
        const double conf = policy_confidence(config, tally.state());
        const auto t1 = std::chrono::steady_clock::now();
        eval_ns += std::chrono::duration<double, std::nano>(t1 - t0).count();

        out.stop_time = n;
        out.final_confidence = conf;
        if (conf >= target) break;
        if (n == config.max_samples) out.truncated = true;
    }

    const std::vector<int> leaders = tally.leaders();
    if (leaders.size() == 1) {
        out.chosen = leaders.front();
    } else {
        constexpr uint64_t kTieBreakTag = 0x7eb1;
        std::mt19937_64 rng(derive_seed(config.seed, kTieBreakTag));
        out.chosen = leaders[static_cast<size_t>(uniform_unit(rng) * leaders.size())];
    }
    out.eval_time_ms = eval_ns * 1e-6;
    return out;
}

int k2_threshold(double p1, double delta) {
    if (!(p1 > 0.5 && p1 < 1.0))
        throw std::invalid_argument("k2_threshold: requires 1/2 < p1 < 1");
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("k2_threshold: delta must lie in (0, 0.5)");
    const double gap = std::log((1.0 - delta) / delta) / std::log(p1 / (1.0 - p1));
    return static_cast<int>(std::ceil(gap));
}

double beta_tail_above_half(int a, int b) {
    if (a < 1 || b < 1) throw std::invalid_argument("beta_tail_above_half: shape < 1");
    // P(Beta(a,b) > 1/2) = sum_{j=0}^{a-1} C(n, j) 2^-n with n = a + b - 1
    const int n = a + b - 1;
    const double log_half_n = -n * std::log(2.0);
    double tail = 0.0;
    for (int jj = 0; jj < a; ++jj) {
        const double lc = std::lgamma(n + 1.0) - std::lgamma(jj + 1.0) - std::lgamma(n - jj + 1.0);
        tail += std::exp(lc + log_half_n);
    }
    return std::min(tail, 1.0);
}

double asc_confidence(const CountState& state) {
    if (state.empty()) throw std::invalid_argument("asc: empty state");
    return beta_tail_above_half(state.top_count() + 1, state.runner_up_count() + 1);
}

bool asc_stop(const CountState& state, double delta) {
    return asc_confidence(state) >= 1.0 - delta;
}

}  // namespace seqstop
