#include "seqstop/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "seqstop/stream.hpp"

namespace seqstop {

namespace {

// sub-seed stream tags
constexpr uint64_t kTruthTag = 1;
constexpr uint64_t kStreamTag = 2;
constexpr uint64_t kTieTag = 3;

struct TrialRecord {
    int stop_time = 0;
    bool success = false;
    bool truncated = false;
    int truth = 0;
    double eval_ms = 0.0;
};

MetricsRow reduce(const std::string& policy, double threshold, int truth_filter,
                  const std::vector<TrialRecord>& recs) {
    MetricsRow row;
    row.policy = policy;
    row.threshold = threshold;
    row.truth_index = truth_filter;

    long long n = 0, successes = 0, truncated = 0;
    double sum = 0.0, sum_sq = 0.0, time_sum = 0.0;
    for (const TrialRecord& r : recs) {
        if (truth_filter >= 0 && r.truth != truth_filter) continue;
        ++n;
        successes += r.success ? 1 : 0;
        truncated += r.truncated ? 1 : 0;
        sum += r.stop_time;
        sum_sq += static_cast<double>(r.stop_time) * r.stop_time;
        time_sum += r.eval_ms;
    }
    row.trials = static_cast<int>(n);
    if (n == 0) return row;

    row.mode_acc = static_cast<double>(successes) / n;
    row.mode_acc_ci95 = 1.96 * std::sqrt(row.mode_acc * (1.0 - row.mode_acc) / n);
    row.num_gen = sum / n;
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / std::max<long long>(1, n - 1));
    row.num_gen_ci95 = 1.96 * std::sqrt(var / n);
    row.trunc_rate = static_cast<double>(truncated) / n;
    row.time_ms = time_sum / n;
    return row;
}

}  // namespace

void ExperimentPlan::validate() const {
    if (std::holds_alternative<std::monostate>(scenario))
        throw std::invalid_argument("experiment plan: scenario not set");
    if (trials < 1) throw std::invalid_argument("experiment plan: trials must be >= 1");
    if (policies.empty()) throw std::invalid_argument("experiment plan: no policies");
    if (thresholds.empty()) throw std::invalid_argument("experiment plan: no thresholds");
    for (double t : thresholds)
        if (!(t > 0.5 && t < 1.0))
            throw std::invalid_argument("experiment plan: thresholds must lie in (0.5, 1)");
    for (const PolicySpec& p : policies) {
        if (p.id.empty()) throw std::invalid_argument("experiment plan: policy without id");
        if (p.aggregation && *p.aggregation < 2)
            throw std::invalid_argument("experiment plan: aggregation level must be >= 2");
        if (p.use_hyper && !std::holds_alternative<HyperPrior>(scenario))
            throw std::invalid_argument(
                "experiment plan: uncertain-prior policy needs a hyper-prior scenario");
    }
}

std::vector<MetricsRow> run_experiment(const ExperimentPlan& plan, int threads) {
    plan.validate();
    const bool uncertain = std::holds_alternative<HyperPrior>(plan.scenario);
    const HyperPrior* hyper = uncertain ? &std::get<HyperPrior>(plan.scenario) : nullptr;
    const Prior* known = uncertain ? nullptr : &std::get<Prior>(plan.scenario);

    const int workers = std::max(1, threads);
    std::vector<MetricsRow> rows;

    for (const PolicySpec& spec : plan.policies) {
        for (double threshold : plan.thresholds) {
            std::vector<TrialRecord> recs(static_cast<size_t>(plan.trials));

            auto run_range = [&](int lo, int hi) {
                for (int t = lo; t < hi; ++t) {
                    const auto ut = static_cast<uint64_t>(t);
                    int truth = 0;
                    if (uncertain) {
                        std::mt19937_64 rng(derive_seed(plan.master_seed, ut, kTruthTag));
                        const double u = uniform_unit(rng);
                        double acc = 0.0;
                        for (int m = 0; m < hyper->size(); ++m) {
                            acc += hyper->weights[static_cast<size_t>(m)];
                            if (u < acc || m == hyper->size() - 1) {
                                truth = m;
                                break;
                            }
                        }
                    }
                    const Prior& truth_prior =
                        uncertain ? hyper->candidates[static_cast<size_t>(truth)] : *known;

                    CategoricalSampler sampler(truth_prior.probs(),
                                               derive_seed(plan.master_seed, ut, kStreamTag));

                    StoppingConfig cfg;
                    cfg.delta = 1.0 - threshold;
                    cfg.aggregation = spec.aggregation;
                    cfg.max_samples = plan.max_samples;
                    cfg.seed = derive_seed(plan.master_seed, ut, kTieTag);
                    if (spec.asc) {
                        cfg.prior_source = PriorFree{};
                    } else if (spec.use_hyper) {
                        cfg.prior_source = *hyper;
                    } else {
                        cfg.prior_source = truth_prior;
                    }

                    const StopOutcome out = run_policy(cfg, sampler.as_stream());
                    TrialRecord& rec = recs[static_cast<size_t>(t)];
                    rec.stop_time = out.stop_time;
                    rec.success = (out.chosen == 0);  // tokens are slot indices
                    rec.truncated = out.truncated;
                    rec.truth = truth;
                    rec.eval_ms = out.eval_time_ms;
                }
            };

            if (workers == 1) {
                run_range(0, plan.trials);
            } else {
                std::vector<std::thread> pool;
                const int chunk = (plan.trials + workers - 1) / workers;
                for (int w = 0; w < workers; ++w) {
                    const int lo = w * chunk;
                    const int hi = std::min(plan.trials, lo + chunk);
                    if (lo < hi) pool.emplace_back(run_range, lo, hi);
                }
                for (std::thread& th : pool) th.join();
            }

            rows.push_back(reduce(spec.id, threshold, -1, recs));
            if (uncertain && plan.per_truth_breakdown)
                for (int m = 0; m < hyper->size(); ++m)
                    rows.push_back(reduce(spec.id, threshold, m, recs));
        }
    }
    return rows;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows,
                       bool include_timing) {
    os << "# seqstop metrics v1\n";
    os << "policy,threshold,truth,trials,mode_acc,mode_acc_ci95,num_gen,num_gen_ci95,trunc_rate";
    if (include_timing) os << ",time_ms";
    os << "\n";
    for (const MetricsRow& r : rows) {
        std::ostringstream line;
        line << r.policy << ',' << std::setprecision(6) << std::fixed << r.threshold << ','
             << (r.truth_index < 0 ? std::string("all") : std::to_string(r.truth_index + 1)) << ','
             << r.trials << ',' << r.mode_acc << ',' << r.mode_acc_ci95 << ',' << std::setprecision(4)
             << r.num_gen << ',' << r.num_gen_ci95 << ',' << std::setprecision(6) << r.trunc_rate;
        if (include_timing) line << ',' << std::setprecision(4) << r.time_ms;
        os << line.str() << "\n";
    }
}

void write_metrics_table(std::ostream& os, const std::vector<MetricsRow>& rows) {
    os << std::left << std::setw(22) << "policy" << std::right << std::setw(10) << "1-delta"
       << std::setw(7) << "truth" << std::setw(9) << "trials" << std::setw(11) << "mode_acc"
       << std::setw(10) << "(ci95)" << std::setw(10) << "num_gen" << std::setw(10) << "(ci95)"
       << std::setw(10) << "trunc" << std::setw(10) << "ms/trial" << "\n";
    for (const MetricsRow& r : rows) {
        os << std::left << std::setw(22) << r.policy << std::right << std::fixed
           << std::setprecision(4) << std::setw(10) << r.threshold << std::setw(7)
           << (r.truth_index < 0 ? std::string("all") : std::to_string(r.truth_index + 1))
           << std::setw(9) << r.trials << std::setprecision(2) << std::setw(10)
           << 100.0 * r.mode_acc << '%' << std::setw(9) << 100.0 * r.mode_acc_ci95 << '%'
           << std::setprecision(2) << std::setw(10) << r.num_gen << std::setw(10) << r.num_gen_ci95
           << std::setprecision(4) << std::setw(10) << r.trunc_rate << std::setprecision(3)
           << std::setw(10) << r.time_ms << "\n";
    }
}

}  // namespace seqstop
