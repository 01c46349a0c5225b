#include "seqstop/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "seqstop/policy.hpp"
#include "seqstop/stream.hpp"

namespace seqstop {

namespace {

constexpr uint64_t kTrajectoryTag = 11;
constexpr uint64_t kTieBreakTag = 12;

struct ReplayTrial {
    int stop_time = 0;
    bool answer_correct = false;
    bool mode_correct = false;
    bool truncated = false;
};

}  // namespace

int QuestionRecord::total_count() const {
    int n = 0;
    for (const auto& [tok, c] : answer_counts) n += c;
    return n;
}

std::vector<QuestionRecord> ingest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest: cannot open " + path);
    return ingest_stream(in, path);
}

std::vector<QuestionRecord> ingest_stream(std::istream& in, const std::string& origin) {
    std::vector<QuestionRecord> out;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto at = origin + ":" + std::to_string(line_no);
        if (line.empty() || line[0] == '#') continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error("ingest: " + at + ": " + e.what());
        }
        QuestionRecord rec;
        try {
            rec.question_id = j.at("question_id").get<std::string>();
            rec.ground_truth = j.at("ground_truth").get<std::string>();
            const auto& counts = j.at("answer_counts");
            if (!counts.is_object() || counts.empty())
                throw std::runtime_error("answer_counts must be a non-empty object");
            for (const auto& [tok, val] : counts.items()) {
                if (!val.is_number_integer() || val.get<long long>() < 1)
                    throw std::runtime_error("answer count for '" + tok + "' must be an integer >= 1");
                rec.answer_counts.emplace_back(tok, val.get<int>());
            }
            if (j.contains("tags"))
                for (const auto& [key, val] : j.at("tags").items())
                    rec.tags[key] = val.get<std::string>();
        } catch (const std::exception& e) {
            throw std::runtime_error("ingest: " + at + ": " + e.what());
        }
        if (!seen.insert(rec.question_id).second)
            throw std::runtime_error("ingest: " + at + ": duplicate question_id '" +
                                     rec.question_id + "'");
        out.push_back(std::move(rec));
    }
    return out;
}

KnownPrior build_known_prior(const QuestionRecord& record, TiePolicy tie) {
    if (record.answer_counts.empty())
        throw std::invalid_argument("build_known_prior: no counts for " + record.question_id);
    const double total = record.total_count();
    if (total <= 0.0)
        throw std::invalid_argument("build_known_prior: zero total count for " + record.question_id);

    // canonical order: count descending, then token ascending
    std::vector<std::pair<std::string, int>> sorted = record.answer_counts;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    std::vector<double> probs;
    std::vector<std::string> tokens;
    probs.reserve(sorted.size());
    for (const auto& [tok, c] : sorted) {
        probs.push_back(c / total);
        tokens.push_back(tok);
    }
    return KnownPrior{Prior::known(std::move(probs), tie), std::move(tokens)};
}

HyperPrior build_hyperprior(const std::vector<QuestionRecord>& train, TiePolicy tie) {
    if (train.empty()) throw std::invalid_argument("build_hyperprior: empty training set");
    std::vector<Prior> candidates;
    candidates.reserve(train.size());
    for (const QuestionRecord& rec : train) {
        KnownPrior kp = build_known_prior(rec, tie);
        candidates.push_back(Prior::candidate(kp.prior.probs(), tie));
    }
    return make_hyper_prior(std::move(candidates));
}

void ReplayPlan::validate() const {
    if (!(split_fraction > 0.0 && split_fraction < 1.0))
        throw std::invalid_argument("replay plan: split fraction must lie in (0,1)");
    if (trajectory_length < 1)
        throw std::invalid_argument("replay plan: trajectory length must be >= 1");
    if (trials_per_question < 1)
        throw std::invalid_argument("replay plan: trials per question must be >= 1");
    if (policies.empty()) throw std::invalid_argument("replay plan: no policies");
    if (thresholds.empty()) throw std::invalid_argument("replay plan: no thresholds");
    for (double t : thresholds)
        if (!(t > 0.5 && t < 1.0))
            throw std::invalid_argument("replay plan: thresholds must lie in (0.5, 1)");
}

std::pair<std::vector<QuestionRecord>, std::vector<QuestionRecord>> split_records(
    std::vector<QuestionRecord> records, double train_fraction, uint64_t seed) {
    std::sort(records.begin(), records.end(),
              [](const QuestionRecord& a, const QuestionRecord& b) {
                  return a.question_id < b.question_id;
              });
    std::mt19937_64 rng(derive_seed(seed, 0x5917));
    std::shuffle(records.begin(), records.end(), rng);
    const auto train_count =
        static_cast<size_t>(std::llround(train_fraction * static_cast<double>(records.size())));
    std::vector<QuestionRecord> train(records.begin(),
                                      records.begin() + static_cast<std::ptrdiff_t>(train_count));
    std::vector<QuestionRecord> test(records.begin() + static_cast<std::ptrdiff_t>(train_count),
                                     records.end());
    return {std::move(train), std::move(test)};
}

std::vector<ReplayRow> run_replay(const std::vector<QuestionRecord>& records,
                                  const ReplayPlan& plan, int threads) {
    plan.validate();
    if (records.empty()) throw std::invalid_argument("run_replay: no records");

    auto [train, test] = split_records(records, plan.split_fraction, plan.split_seed);
    if (train.empty() || test.empty())
        throw std::invalid_argument("run_replay: split leaves an empty train or test set");

    const HyperPrior hyper = build_hyperprior(train, plan.tie);
    const int hyper_k = hyper.num_slots();

    // per-question state shared across policies; canonical test order fixes seeds
    std::sort(test.begin(), test.end(), [](const QuestionRecord& a, const QuestionRecord& b) {
        return a.question_id < b.question_id;
    });
    struct PreparedQuestion {
        KnownPrior known;
        bool fits_hyper = false;
    };
    std::vector<PreparedQuestion> prepared;
    prepared.reserve(test.size());
    for (const QuestionRecord& rec : test)
        prepared.push_back({build_known_prior(rec, plan.tie), rec.support() <= hyper_k});

    std::vector<ReplayRow> rows;
    const int workers = std::max(1, threads);

    for (const PolicySpec& spec : plan.policies) {
        for (double threshold : plan.thresholds) {
            const size_t units = test.size() * static_cast<size_t>(plan.trials_per_question);
            std::vector<ReplayTrial> trials(units);

            auto run_range = [&](size_t lo, size_t hi) {
                for (size_t u = lo; u < hi; ++u) {
                    const size_t qi = u / static_cast<size_t>(plan.trials_per_question);
                    const size_t rep = u % static_cast<size_t>(plan.trials_per_question);
                    const QuestionRecord& rec = test[qi];
                    const PreparedQuestion& prep = prepared[qi];
                    if (spec.use_hyper && !prep.fits_hyper) continue;

                    CategoricalSampler sampler(
                        prep.known.prior.probs(),
                        derive_seed(plan.master_seed, qi * 1000003ull + rep, kTrajectoryTag));

                    StoppingConfig cfg;
                    cfg.delta = 1.0 - threshold;
                    cfg.aggregation = spec.aggregation;
                    cfg.max_samples = plan.trajectory_length;
                    cfg.seed = derive_seed(plan.master_seed, qi * 1000003ull + rep, kTieBreakTag);
                    cfg.allow_large_k = true;  // question supports can exceed the exact-mode K guard
                    if (spec.asc) {
                        cfg.prior_source = PriorFree{};
                    } else if (spec.use_hyper) {
                        cfg.prior_source = hyper;
                    } else {
                        cfg.prior_source = prep.known.prior;
                    }

                    const StopOutcome out = run_policy(cfg, sampler.as_stream());
                    ReplayTrial& tr = trials[u];
                    tr.stop_time = out.stop_time;
                    tr.truncated = out.truncated;
                    const std::string& chosen_token =
                        prep.known.slot_tokens[static_cast<size_t>(out.chosen)];
                    tr.answer_correct = (chosen_token == rec.ground_truth);
                    tr.mode_correct = (out.chosen == 0);
                }
            };

            if (workers == 1) {
                run_range(0, units);
            } else {
                std::vector<std::thread> pool;
                const size_t chunk = (units + static_cast<size_t>(workers) - 1) / workers;
                for (int w = 0; w < workers; ++w) {
                    const size_t lo = static_cast<size_t>(w) * chunk;
                    const size_t hi = std::min(units, lo + chunk);
                    if (lo < hi) pool.emplace_back(run_range, lo, hi);
                }
                for (std::thread& th : pool) th.join();
            }

            ReplayRow row;
            row.policy = spec.id;
            row.threshold = threshold;
            long long n = 0, ans = 0, mode = 0, trunc = 0;
            double stop_sum = 0.0;
            for (size_t qi = 0; qi < test.size(); ++qi) {
                if (spec.use_hyper && !prepared[qi].fits_hyper) continue;
                for (int rep = 0; rep < plan.trials_per_question; ++rep) {
                    const ReplayTrial& tr =
                        trials[qi * static_cast<size_t>(plan.trials_per_question) +
                               static_cast<size_t>(rep)];
                    ++n;
                    ans += tr.answer_correct ? 1 : 0;
                    mode += tr.mode_correct ? 1 : 0;
                    trunc += tr.truncated ? 1 : 0;
                    stop_sum += tr.stop_time;
                }
            }
            for (size_t qi = 0; qi < test.size(); ++qi)
                if (!spec.use_hyper || prepared[qi].fits_hyper) ++row.questions;
            row.skipped = static_cast<int>(test.size()) - row.questions;
            row.trials = static_cast<int>(n);
            if (n > 0) {
                row.ans_acc = static_cast<double>(ans) / n;
                row.mode_acc = static_cast<double>(mode) / n;
                row.num_gen = stop_sum / n;
                row.trunc_rate = static_cast<double>(trunc) / n;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_replay_csv(std::ostream& os, const std::vector<ReplayRow>& rows) {
    os << "# seqstop replay metrics v1\n";
    os << "policy,threshold,questions,trials,ans_acc,mode_acc,num_gen,trunc_rate,skipped\n";
    for (const ReplayRow& r : rows) {
        os << r.policy << ',' << std::setprecision(6) << std::fixed << r.threshold << ','
           << r.questions << ',' << r.trials << ',' << r.ans_acc << ',' << r.mode_acc << ','
           << std::setprecision(4) << r.num_gen << ',' << std::setprecision(6) << r.trunc_rate
           << ',' << r.skipped << "\n";
    }
}

void write_replay_table(std::ostream& os, const std::vector<ReplayRow>& rows) {
    os << std::left << std::setw(22) << "policy" << std::right << std::setw(10) << "1-delta"
       << std::setw(7) << "quest" << std::setw(9) << "trials" << std::setw(10) << "ans_acc"
       << std::setw(11) << "mode_acc" << std::setw(10) << "num_gen" << std::setw(9) << "trunc"
       << std::setw(9) << "skips" << "\n";
    for (const ReplayRow& r : rows) {
        os << std::left << std::setw(22) << r.policy << std::right << std::fixed
           << std::setprecision(4) << std::setw(10) << r.threshold << std::setw(7) << r.questions
           << std::setw(9) << r.trials << std::setprecision(2) << std::setw(9) << 100.0 * r.ans_acc
           << '%' << std::setw(10) << 100.0 * r.mode_acc << '%' << std::setw(10) << r.num_gen
           << std::setprecision(4) << std::setw(9) << r.trunc_rate << std::setw(9) << r.skipped
           << "\n";
    }
}

}  // namespace seqstop
