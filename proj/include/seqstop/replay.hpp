#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqstop/prior.hpp"
#include "seqstop/simulate.hpp"

namespace seqstop {

// Per-question empirical answer distribution replayed in place of live
// sampling.  ground_truth need not appear among the counted answers.
struct QuestionRecord {
    std::string question_id;
    std::vector<std::pair<std::string, int>> answer_counts;  // token -> count
    std::string ground_truth;
    std::map<std::string, std::string> tags;

    int total_count() const;
    int support() const { return static_cast<int>(answer_counts.size()); }
};

// Reads JSON Lines (one record per line; '#' comments and blanks skipped).
// Malformed lines and duplicate question ids raise with the line number.
std::vector<QuestionRecord> ingest(const std::string& path);
std::vector<QuestionRecord> ingest_stream(std::istream& in, const std::string& origin);

// Normalized, descending empirical distribution plus the slot -> token map
// used for accuracy scoring.  Count ties at the top resolve by token order
// and are jittered (or rejected) per the tie policy.
struct KnownPrior {
    Prior prior;
    std::vector<std::string> slot_tokens;
};
KnownPrior build_known_prior(const QuestionRecord& record, TiePolicy tie = TiePolicy::jitter);

// Candidate set from training records: supports zero-padded to a common K,
// uniform weights.
HyperPrior build_hyperprior(const std::vector<QuestionRecord>& train,
                            TiePolicy tie = TiePolicy::jitter);

struct ReplayPlan {
    double split_fraction = 0.7;  // train share
    uint64_t split_seed = 0;
    int trajectory_length = 100;
    std::vector<double> thresholds = {0.95, 0.975, 0.99};
    std::vector<PolicySpec> policies;  // use_hyper picks the uncertain variant
    int trials_per_question = 5;
    uint64_t master_seed = 1;
    TiePolicy tie = TiePolicy::jitter;

    void validate() const;
};

struct ReplayRow {
    std::string policy;
    double threshold = 0.0;
    int questions = 0;  // test questions contributing trials
    int trials = 0;
    double ans_acc = 0.0;   // chosen answer string equals ground_truth
    double mode_acc = 0.0;  // chosen answer equals the question's empirical mode
    double num_gen = 0.0;
    double trunc_rate = 0.0;
    int skipped = 0;  // questions excluded (support exceeds the training K)
};

// Deterministic 70/30-style split: canonical sort by question_id, then a
// seeded shuffle.  Exposed for tests.
std::pair<std::vector<QuestionRecord>, std::vector<QuestionRecord>> split_records(
    std::vector<QuestionRecord> records, double train_fraction, uint64_t seed);

// Replays every test question with bootstrap trajectories of
// `trajectory_length`: known-prior policies receive the question's own
// distribution, uncertain policies only the training hyper-prior.
std::vector<ReplayRow> run_replay(const std::vector<QuestionRecord>& records,
                                  const ReplayPlan& plan, int threads = 1);

void write_replay_csv(std::ostream& os, const std::vector<ReplayRow>& rows);
void write_replay_table(std::ostream& os, const std::vector<ReplayRow>& rows);

}  // namespace seqstop
