#pragma once

#include <span>
#include <unordered_map>
#include <vector>

namespace seqstop {

// One frequency level: `multiplicity` distinct answers were each observed
// exactly `count` times.
struct FrequencyLevel {
    int count;         // v
    int multiplicity;  // c
    auto operator<=>(const FrequencyLevel&) const = default;
};

// Count-of-counts summary of an answer stream.  Stores no answer identities;
// any permutation of the same sample multiset yields an identical state.
class CountState {
public:
    CountState() = default;

    // builds from per-answer occurrence counts (order irrelevant, zeros ignored)
    static CountState from_counts(std::span<const int> counts);
    // builds directly from (count, multiplicity) levels; validates invariants
    static CountState from_levels(std::vector<FrequencyLevel> levels);

    // One more sample of an answer previously seen `previous_count` times
    // (0 = fresh answer).  Pure: returns the successor state.
    CountState observe(int previous_count) const;

    const std::vector<FrequencyLevel>& levels() const { return levels_; }
    int total() const { return total_; }        // n
    int distinct() const { return distinct_; }  // M(n)
    bool empty() const { return total_ == 0; }

    // per-answer counts n_1 >= n_2 >= ... >= n_M expanded from the levels
    std::vector<int> answer_counts() const;
    int top_count() const;        // v_1 (0 when empty)
    int runner_up_count() const;  // count of the second most frequent answer (0 if none)

    bool operator==(const CountState&) const = default;

private:
    std::vector<FrequencyLevel> levels_;  // counts strictly decreasing
    int total_ = 0;
    int distinct_ = 0;
};

// Top-(L-1) condensation: head levels counted explicitly, everything below
// the cutoff pooled into `residual` samples.
struct AggregatedCountState {
    std::vector<FrequencyLevel> head;  // (v_j, c'_j), j = 1..d
    int cutoff = 0;                    // v_d
    int head_count = 0;                // L(n) = min(L-1, M(n))
    int residual = 0;                  // n - sum over head of v*c'
    int total = 0;                     // n
    int aggregation = 2;               // L

    // head per-answer counts n_1 >= ... >= n_{L(n)}
    std::vector<int> head_answer_counts() const;
    // multiplicity at the cutoff level, c'_d
    int cutoff_multiplicity() const { return head.empty() ? 0 : head.back().multiplicity; }
};

// Condenses a non-empty state per the defining inequality
// sum_{j<d} c_j < min(L-1, M(n)) <= sum_{j<=d} c_j.  Requires L >= 2.
AggregatedCountState condense(const CountState& state, int aggregation_level);

// Per-trial bookkeeping: opaque answer tokens -> occurrence counts, with the
// CountState maintained incrementally via observe().
class TrialTally {
public:
    void observe(int token);
    const CountState& state() const { return state_; }
    int count_of(int token) const;
    // tokens holding the current maximum count (tie set)
    std::vector<int> leaders() const;

private:
    std::unordered_map<int, int> counts_;
    CountState state_;
};

}  // namespace seqstop
