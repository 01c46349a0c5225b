#include "seqstop/posterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>

#include "seqstop/scaled.hpp"
#include "seqstop/tail_sum.hpp"

namespace seqstop {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(p^n) with 0^0 = 1
double log_pow(double p, int n) {
    if (n == 0) return 0.0;
    if (p <= 0.0) return kNegInf;
    return n * std::log(p);
}

// ---------------------------------------------------------------------------
// Injective-assignment sum over all labels, log Sum_psi prod_j p[psi(j)]^c[j],
// via a subset DP: f_j[S] accumulates assignments of the first j positions to
// the label set S.  Layered with per-layer renormalization so counts in the
// thousands stay representable.
// ---------------------------------------------------------------------------

const std::vector<std::vector<uint32_t>>& subsets_by_size(int k) {
    thread_local int cached_k = -1;
    thread_local std::vector<std::vector<uint32_t>> table;
    if (cached_k != k) {
        table.assign(static_cast<size_t>(k) + 1, {});
        for (uint32_t s = 0; s < (1u << k); ++s)
            table[static_cast<size_t>(std::popcount(s))].push_back(s);
        cached_k = k;
    }
    return table;
}

double assignment_log_sum(const std::vector<double>& probs, std::span<const int> counts,
                          uint32_t label_mask) {
    const int k = static_cast<int>(probs.size());
    const int m = static_cast<int>(counts.size());
    if (m == 0) return 0.0;
    if (m > std::popcount(label_mask)) return kNegInf;

    // per-position weights normalized by the position maximum
    std::vector<double> w(static_cast<size_t>(m) * k, 0.0);
    double offset = 0.0;
    for (int j = 0; j < m; ++j) {
        double best = kNegInf;
        for (int l = 0; l < k; ++l) {
            if (!(label_mask >> l & 1u)) continue;
            best = std::max(best, log_pow(probs[static_cast<size_t>(l)], counts[j]));
        }
        if (best == kNegInf) return kNegInf;
        offset += best;
        for (int l = 0; l < k; ++l) {
            if (!(label_mask >> l & 1u)) continue;
            w[static_cast<size_t>(j) * k + l] =
                std::exp(log_pow(probs[static_cast<size_t>(l)], counts[j]) - best);
        }
    }

    const auto& by_size = subsets_by_size(k);
    thread_local std::vector<double> prev, cur;
    prev.assign(size_t{1} << k, 0.0);
    cur.assign(size_t{1} << k, 0.0);
    prev[0] = 1.0;
    double log_scale = 0.0;

    for (int j = 1; j <= m; ++j) {
        double layer_max = 0.0;
        for (uint32_t s : by_size[static_cast<size_t>(j)]) {
            if (s & ~label_mask) continue;
            double acc = 0.0;
            uint32_t rest = s;
            while (rest) {
                const int l = std::countr_zero(rest);
                rest &= rest - 1;
                const double p = prev[s ^ (1u << l)];
                if (p != 0.0) acc += p * w[static_cast<size_t>(j - 1) * k + l];
            }
            cur[s] = acc;
            layer_max = std::max(layer_max, acc);
        }
        if (layer_max == 0.0) return kNegInf;
        for (uint32_t s : by_size[static_cast<size_t>(j)])
            if (!(s & ~label_mask)) cur[s] /= layer_max;
        log_scale += std::log(layer_max);
        std::swap(prev, cur);
        for (uint32_t s : by_size[static_cast<size_t>(j)])
            if (!(s & ~label_mask)) cur[s] = 0.0;
    }

    double total = 0.0;
    for (uint32_t s : by_size[static_cast<size_t>(m)])
        if (!(s & ~label_mask)) total += prev[s];
    if (total == 0.0) return kNegInf;
    return std::log(total) + log_scale + offset;
}

// ---------------------------------------------------------------------------
// Bijection sum over a small explicit label subset (for the aggregated head):
// log Sum over bijections positions -> labels of prod p[l]^c[j], by direct
// recursion; position 0 may be pinned to a fixed label.
// ---------------------------------------------------------------------------

void bijection_log_terms(const std::vector<double>& probs, std::span<const int> counts,
                         std::vector<int>& labels, size_t depth, double log_acc,
                         LogSumAccumulator& out) {
    if (depth == counts.size()) {
        out.add(log_acc);
        return;
    }
    for (size_t i = depth; i < labels.size(); ++i) {
        std::swap(labels[depth], labels[i]);
        const double lp = log_pow(probs[static_cast<size_t>(labels[depth])], counts[depth]);
        if (lp != kNegInf)
            bijection_log_terms(probs, counts, labels, depth + 1, log_acc + lp, out);
        std::swap(labels[depth], labels[i]);
    }
}

double bijection_log_sum(const std::vector<double>& probs, std::span<const int> counts,
                         std::vector<int> labels) {
    LogSumAccumulator acc;
    bijection_log_terms(probs, counts, labels, 0, 0.0, acc);
    return acc.log();
}

// ---------------------------------------------------------------------------
// Log numerator/denominator pairs; -inf marks "impossible under this prior"
// so mixtures can skip candidates without throwing.
// ---------------------------------------------------------------------------

struct LogParts {
    double num = kNegInf;
    double den = kNegInf;
};

void check_exact_size(const Prior& prior, bool allow_large_k) {
    if (prior.size() > kExactPosteriorHardMaxK)
        throw std::invalid_argument("exact posterior: K exceeds the hard limit of 20");
    if (prior.size() > kExactPosteriorMaxK && !allow_large_k)
        throw std::invalid_argument(
            "exact posterior: K > 12 refused (factorial cost); pass the override to force");
}

LogParts exact_log_parts(const Prior& prior, const std::vector<int>& counts) {
    const std::vector<double>& p = prior.probs();
    const uint32_t full = (prior.size() >= 32) ? ~0u : ((1u << prior.size()) - 1u);
    LogParts parts;
    parts.den = assignment_log_sum(p, counts, full);
    if (parts.den == kNegInf) return parts;
    std::span<const int> rest(counts.data() + 1, counts.size() - 1);
    parts.num = log_pow(p[0], counts[0]) + assignment_log_sum(p, rest, full & ~1u);
    return parts;
}

LogParts aggregated_log_parts(const Prior& prior, const AggregatedCountState& agg) {
    const std::vector<double>& p = prior.probs();
    const int k = prior.size();
    const int ln = agg.head_count;
    if (ln > k) return {};
    const std::vector<int> head_counts = agg.head_answer_counts();

    // S~ depends on the tail only through its probability multiset
    std::map<std::vector<double>, ScaledValue> tail_cache;
    LogSumAccumulator num, den;

    std::vector<int> members(static_cast<size_t>(ln));
    for (int i = 0; i < ln; ++i) members[static_cast<size_t>(i)] = i;

    // iterate all size-ln subsets of [k] in lexicographic order
    while (true) {
        std::vector<double> tail;
        tail.reserve(static_cast<size_t>(k - ln));
        {
            size_t next = 0;
            for (int l = 0; l < k; ++l) {
                if (next < members.size() && members[next] == l) {
                    ++next;
                    continue;
                }
                tail.push_back(p[static_cast<size_t>(l)]);
            }
        }
        std::sort(tail.begin(), tail.end());
        auto it = tail_cache.find(tail);
        if (it == tail_cache.end()) {
            TailSpec spec{tail, agg.cutoff, agg.cutoff_multiplicity(), agg.residual};
            it = tail_cache.emplace(std::move(tail), tilde_tail_sum(spec)).first;
        }
        const ScaledValue& s_tilde = it->second;

        if (!s_tilde.is_zero()) {
            const double log_s = s_tilde.log();
            den.add(bijection_log_sum(p, head_counts, members) + log_s);
            if (members.front() == 0) {
                std::span<const int> rest(head_counts.data() + 1, head_counts.size() - 1);
                std::vector<int> others(members.begin() + 1, members.end());
                num.add(log_pow(p[0], head_counts[0]) + bijection_log_sum(p, rest, others) + log_s);
            }
        }

        // next combination
        int i = ln - 1;
        while (i >= 0 && members[static_cast<size_t>(i)] == k - ln + i) --i;
        if (i < 0) break;
        ++members[static_cast<size_t>(i)];
        for (int j = i + 1; j < ln; ++j)
            members[static_cast<size_t>(j)] = members[static_cast<size_t>(j - 1)] + 1;
    }

    return {num.log(), den.log()};
}

PosteriorResult finish(const LogParts& parts, const char* what) {
    if (parts.den == kNegInf)
        throw model_violation_error(std::string(what) +
                                    ": observations impossible under the prior");
    PosteriorResult r;
    r.log_numerator = parts.num;
    r.log_denominator = parts.den;
    r.p_mode = std::min(1.0, std::exp(parts.num - parts.den));
    return r;
}

}  // namespace

PosteriorResult exact_posterior(const Prior& prior, const CountState& state, bool allow_large_k) {
    check_exact_size(prior, allow_large_k);
    if (state.empty()) throw std::invalid_argument("exact posterior: empty state");
    if (state.distinct() > prior.size())
        throw model_violation_error("exact posterior: more distinct answers than prior slots");
    return finish(exact_log_parts(prior, state.answer_counts()), "exact posterior");
}

std::vector<double> hypothesis_posteriors(const Prior& prior, const CountState& state,
                                          bool allow_large_k) {
    check_exact_size(prior, allow_large_k);
    if (state.empty()) throw std::invalid_argument("hypothesis posteriors: empty state");
    if (state.distinct() > prior.size())
        throw model_violation_error("hypothesis posteriors: more distinct answers than prior slots");

    const std::vector<double>& p = prior.probs();
    const std::vector<int> counts = state.answer_counts();
    const uint32_t full = (prior.size() >= 32) ? ~0u : ((1u << prior.size()) - 1u);
    const double log_den = assignment_log_sum(p, counts, full);
    if (log_den == kNegInf)
        throw model_violation_error("hypothesis posteriors: observations impossible under the prior");

    std::vector<double> out;
    out.reserve(state.levels().size());
    size_t pos = 0;
    for (const auto& level : state.levels()) {
        // pin one representative answer of this level to slot 1
        std::vector<int> rest = counts;
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
        const double log_num =
            log_pow(p[0], level.count) + assignment_log_sum(p, rest, full & ~1u);
        out.push_back(std::exp(log_num - log_den));
        pos += static_cast<size_t>(level.multiplicity);
    }
    return out;
}

PosteriorResult aggregated_posterior(const Prior& prior, const AggregatedCountState& agg) {
    if (agg.head_count > prior.size())
        throw model_violation_error("aggregated posterior: more tracked answers than prior slots");
    return finish(aggregated_log_parts(prior, agg), "aggregated posterior");
}

PosteriorResult mixture_posterior(const HyperPrior& hyper, const CountState& state,
                                  bool allow_large_k) {
    if (hyper.candidates.empty()) throw std::invalid_argument("mixture posterior: no candidates");
    check_exact_size(hyper.candidates.front(), allow_large_k);
    if (state.empty()) throw std::invalid_argument("mixture posterior: empty state");
    if (state.distinct() > hyper.num_slots())
        throw model_violation_error("mixture posterior: more distinct answers than prior slots");

    const std::vector<int> counts = state.answer_counts();
    LogSumAccumulator num, den;
    for (int m = 0; m < hyper.size(); ++m) {
        const double w = hyper.weights[static_cast<size_t>(m)];
        if (w == 0.0) continue;
        const LogParts parts = exact_log_parts(hyper.candidates[static_cast<size_t>(m)], counts);
        const double log_w = std::log(w);
        if (parts.den != kNegInf) den.add(log_w + parts.den);
        if (parts.num != kNegInf) num.add(log_w + parts.num);
    }
    return finish({num.log(), den.log()}, "mixture posterior");
}

PosteriorResult mixture_aggregated_posterior(const HyperPrior& hyper,
                                             const AggregatedCountState& agg) {
    if (hyper.candidates.empty())
        throw std::invalid_argument("mixture aggregated posterior: no candidates");
    if (agg.head_count > hyper.num_slots())
        throw model_violation_error(
            "mixture aggregated posterior: more tracked answers than prior slots");

    LogSumAccumulator num, den;
    for (int m = 0; m < hyper.size(); ++m) {
        const double w = hyper.weights[static_cast<size_t>(m)];
        if (w == 0.0) continue;
        const LogParts parts = aggregated_log_parts(hyper.candidates[static_cast<size_t>(m)], agg);
        const double log_w = std::log(w);
        if (parts.den != kNegInf) den.add(log_w + parts.den);
        if (parts.num != kNegInf) num.add(log_w + parts.num);
    }
    return finish({num.log(), den.log()}, "mixture aggregated posterior");
}

}  // namespace seqstop
