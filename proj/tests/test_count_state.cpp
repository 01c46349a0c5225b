#include <doctest.h>

#include <algorithm>
#include <climits>
#include <random>

#include "seqstop/count_state.hpp"

using namespace seqstop;

TEST_CASE("observe builds count-of-counts incrementally") {
    CountState s;
    SUBCASE("single fresh sample") {
        s = s.observe(0);
        CHECK(s.levels() == std::vector<FrequencyLevel>{{1, 1}});
        CHECK(s.total() == 1);
        CHECK(s.distinct() == 1);
    }
    SUBCASE("sequence B, A, B, D") {
        s = s.observe(0);  // B fresh
        s = s.observe(0);  // A fresh
        s = s.observe(1);  // B again
        s = s.observe(0);  // D fresh
        CHECK(s.levels() == std::vector<FrequencyLevel>{{2, 1}, {1, 2}});
        CHECK(s.total() == 4);
        CHECK(s.distinct() == 3);
    }
    SUBCASE("incrementing the head answer") {
        s = CountState::from_levels({{2, 1}, {1, 2}});
        s = s.observe(2);
        CHECK(s.levels() == std::vector<FrequencyLevel>{{3, 1}, {1, 2}});
        CHECK(s.total() == 5);
    }
}

TEST_CASE("observe validates the previous count") {
    CountState s = CountState::from_levels({{2, 1}});
    CHECK_THROWS_AS(s.observe(3), std::invalid_argument);
    CHECK_THROWS_AS(s.observe(-1), std::invalid_argument);
}

TEST_CASE("state identities hold after random observation runs") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 5);
        std::vector<int> counts(static_cast<size_t>(k), 0);
        CountState s;
        const int n = 1 + static_cast<int>(rng() % 40);
        for (int t = 0; t < n; ++t) {
            const int slot = static_cast<int>(rng() % k);
            s = s.observe(counts[static_cast<size_t>(slot)]);
            ++counts[static_cast<size_t>(slot)];
        }
        CHECK(s == CountState::from_counts(counts));
        int sum_c = 0, sum_vc = 0, prev = INT_MAX;
        for (const auto& [v, c] : s.levels()) {
            CHECK(v < prev);
            prev = v;
            sum_c += c;
            sum_vc += v * c;
        }
        CHECK(sum_c == s.distinct());
        CHECK(sum_vc == s.total());
    }
}

TEST_CASE("count state is order-insensitive") {
    std::mt19937 rng(11);
    std::vector<int> seq = {0, 1, 1, 2, 0, 0, 3, 1};
    auto build = [](const std::vector<int>& draws) {
        std::vector<int> counts(8, 0);
        CountState s;
        for (int slot : draws) {
            s = s.observe(counts[static_cast<size_t>(slot)]);
            ++counts[static_cast<size_t>(slot)];
        }
        return s;
    };
    const CountState base = build(seq);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(seq.begin(), seq.end(), rng);
        CHECK(build(seq) == base);
    }
}

TEST_CASE("condense matches the worked example") {
    const CountState s = CountState::from_levels({{10, 1}, {3, 2}, {2, 1}});
    REQUIRE(s.total() == 18);

    SUBCASE("L = 3 splits the tied level") {
        const AggregatedCountState a = condense(s, 3);
        CHECK(a.head == std::vector<FrequencyLevel>{{10, 1}, {3, 1}});
        CHECK(a.cutoff == 3);
        CHECK(a.head_count == 2);
        CHECK(a.residual == 5);
        CHECK(a.cutoff_multiplicity() == 1);
    }
    SUBCASE("L = 4 keeps the tied level whole") {
        const AggregatedCountState a = condense(s, 4);
        CHECK(a.head == std::vector<FrequencyLevel>{{10, 1}, {3, 2}});
        CHECK(a.cutoff == 3);
        CHECK(a.residual == 2);
        CHECK(a.cutoff_multiplicity() == 2);
    }
    SUBCASE("L = 2 keeps only the top answer") {
        const AggregatedCountState a = condense(s, 2);
        CHECK(a.head == std::vector<FrequencyLevel>{{10, 1}});
        CHECK(a.cutoff == 10);
        CHECK(a.residual == 8);
    }
}

TEST_CASE("condense with a large L reproduces the full state") {
    const CountState s = CountState::from_levels({{2, 1}, {1, 2}});
    const AggregatedCountState a = condense(s, 8);
    CHECK(a.head == s.levels());
    CHECK(a.residual == 0);
    CHECK(a.head_count == s.distinct());
}

TEST_CASE("condense rejects L < 2 and empty states") {
    CHECK_THROWS_AS(condense(CountState::from_levels({{1, 1}}), 1), std::invalid_argument);
    CHECK_THROWS_AS(condense(CountState{}, 3), std::invalid_argument);
}

TEST_CASE("condensation conserves samples and refines monotonically") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 2 + static_cast<int>(rng() % 6);
        std::vector<int> counts(static_cast<size_t>(k), 0);
        const int n = 1 + static_cast<int>(rng() % 30);
        for (int t = 0; t < n; ++t) ++counts[rng() % k];
        const CountState s = CountState::from_counts(counts);

        std::vector<int> prev_head;
        for (int lvl = 2; lvl <= k + 2; ++lvl) {
            const AggregatedCountState a = condense(s, lvl);
            int head_samples = 0;
            for (const auto& [v, c] : a.head) head_samples += v * c;
            CHECK(head_samples + a.residual == s.total());
            CHECK(a.residual >= 0);

            // finer heads extend coarser ones
            const std::vector<int> head = a.head_answer_counts();
            REQUIRE(head.size() >= prev_head.size());
            for (size_t i = 0; i < prev_head.size(); ++i) CHECK(head[i] == prev_head[i]);
            prev_head = head;
        }
        CHECK(condense(s, k + 1).residual == 0);
    }
}

TEST_CASE("trial tally tracks leaders and feeds the state") {
    TrialTally tally;
    for (int tok : {5, 9, 5, 7}) tally.observe(tok);
    CHECK(tally.state() == CountState::from_levels({{2, 1}, {1, 2}}));
    CHECK(tally.leaders() == std::vector<int>{5});
    CHECK(tally.count_of(9) == 1);
    CHECK(tally.count_of(42) == 0);

    tally.observe(9);
    CHECK(tally.leaders() == std::vector<int>{5, 9});
}
