#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "seqstop/policy.hpp"
#include "seqstop/prior.hpp"

namespace seqstop {

// One stopping rule to benchmark.  In an uncertain scenario a Bayes policy
// either receives the sampled truth ("known prior" rows) or only the
// hyper-prior ("uncertain prior" rows).
struct PolicySpec {
    std::string id;
    bool asc = false;
    std::optional<int> aggregation;  // L; nullopt = exact posterior (Bayes only)
    bool use_hyper = false;          // uncertain-prior variant
};

struct ExperimentPlan {
    // known pi | candidate set with truth ~ lambda; must be set before running
    std::variant<std::monostate, Prior, HyperPrior> scenario;
    std::vector<PolicySpec> policies;
    std::vector<double> thresholds;  // confidence levels 1 - delta, each in (0.5, 1)
    int trials = 10000;
    uint64_t master_seed = 1;
    int max_samples = 100;
    bool per_truth_breakdown = false;  // add per-truth metric blocks (uncertain only)

    void validate() const;
};

struct MetricsRow {
    std::string policy;
    double threshold = 0.0;
    int truth_index = -1;  // -1 = global; otherwise conditioned on truth m
    int trials = 0;
    double mode_acc = 0.0;
    double mode_acc_ci95 = 0.0;
    double num_gen = 0.0;
    double num_gen_ci95 = 0.0;
    double trunc_rate = 0.0;
    double time_ms = 0.0;  // mean posterior-evaluation time per trial
};

// Runs every (policy, threshold) cell for `trials` seeded trials.  Trial
// sub-seeds derive from (master_seed, trial index) only, so results are
// identical for any worker count.
std::vector<MetricsRow> run_experiment(const ExperimentPlan& plan, int threads = 1);

// fixed, versioned column order; timing column optional to keep default
// output byte-stable across runs
void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows,
                       bool include_timing = false);
void write_metrics_table(std::ostream& os, const std::vector<MetricsRow>& rows);

}  // namespace seqstop
