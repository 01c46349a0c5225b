#include "seqstop/count_state.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

namespace seqstop {

CountState CountState::from_counts(std::span<const int> counts) {
    std::map<int, int, std::greater<int>> by_count;
    for (int c : counts) {
        if (c < 0) throw std::invalid_argument("count state: negative count");
        if (c > 0) ++by_count[c];
    }
    std::vector<FrequencyLevel> levels;
    levels.reserve(by_count.size());
    for (auto [v, c] : by_count) levels.push_back({v, c});
    return from_levels(std::move(levels));
}

CountState CountState::from_levels(std::vector<FrequencyLevel> levels) {
    CountState s;
    for (size_t i = 0; i < levels.size(); ++i) {
        const auto& [v, c] = levels[i];
        if (v < 1 || c < 1) throw std::invalid_argument("count state: levels need v >= 1, c >= 1");
        if (i > 0 && v >= levels[i - 1].count)
            throw std::invalid_argument("count state: level counts must be strictly decreasing");
        s.total_ += v * c;
        s.distinct_ += c;
    }
    s.levels_ = std::move(levels);
    return s;
}

CountState CountState::observe(int previous_count) const {
    if (previous_count < 0) throw std::invalid_argument("observe: negative previous count");
    CountState next = *this;
    auto& lv = next.levels_;

    if (previous_count > 0) {
        auto it = std::find_if(lv.begin(), lv.end(),
                               [&](const FrequencyLevel& l) { return l.count == previous_count; });
        if (it == lv.end())
            throw std::invalid_argument("observe: no answer has count " + std::to_string(previous_count));
        if (--it->multiplicity == 0) it = lv.erase(it);
    } else {
        ++next.distinct_;
    }

    int target = previous_count + 1;
    auto pos = std::find_if(lv.begin(), lv.end(),
                            [&](const FrequencyLevel& l) { return l.count <= target; });
    if (pos != lv.end() && pos->count == target) {
        ++pos->multiplicity;
    } else {
        lv.insert(pos, {target, 1});
    }
    ++next.total_;
    return next;
}

std::vector<int> CountState::answer_counts() const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(distinct_));
    for (const auto& [v, c] : levels_)
        for (int i = 0; i < c; ++i) out.push_back(v);
    return out;
}

int CountState::top_count() const { return levels_.empty() ? 0 : levels_.front().count; }

int CountState::runner_up_count() const {
    if (levels_.empty()) return 0;
    if (levels_.front().multiplicity >= 2) return levels_.front().count;
    return levels_.size() >= 2 ? levels_[1].count : 0;
}

AggregatedCountState condense(const CountState& state, int aggregation_level) {
    if (aggregation_level < 2) throw std::invalid_argument("condense: aggregation level must be >= 2");
    if (state.empty()) throw std::invalid_argument("condense: empty state");

    const int head_count = std::min(aggregation_level - 1, state.distinct());

    AggregatedCountState agg;
    agg.aggregation = aggregation_level;
    agg.head_count = head_count;
    agg.total = state.total();

    int taken = 0;
    int head_samples = 0;
    for (const auto& [v, c] : state.levels()) {
        int take = std::min(c, head_count - taken);
        agg.head.push_back({v, take});
        taken += take;
        head_samples += v * take;
        if (taken == head_count) {
            agg.cutoff = v;
            break;
        }
    }
    agg.residual = state.total() - head_samples;
    return agg;
}

std::vector<int> AggregatedCountState::head_answer_counts() const {
    std::vector<int> out;
    out.reserve(static_cast<size_t>(head_count));
    for (const auto& [v, c] : head)
        for (int i = 0; i < c; ++i) out.push_back(v);
    return out;
}

void TrialTally::observe(int token) {
    int& c = counts_[token];
    state_ = state_.observe(c);
    ++c;
}

int TrialTally::count_of(int token) const {
    auto it = counts_.find(token);
    return it == counts_.end() ? 0 : it->second;
}

std::vector<int> TrialTally::leaders() const {
    int best = state_.top_count();
    std::vector<int> out;
    for (const auto& [tok, c] : counts_)
        if (c == best) out.push_back(tok);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace seqstop
