#include "seqstop/rates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace seqstop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// kl_bernoulli extended to b outside (0,1): an impossible confusion costs
// infinitely many nats
double kl_bernoulli_ext(double a, double b) {
    if (b <= 0.0 || b >= 1.0) return kInf;
    return kl_bernoulli(a, b);
}

void require_strict_mode(const Prior& p, const char* what) {
    if (p.size() < 2 || !(p[0] > p[1]))
        throw std::invalid_argument(std::string(what) + ": requires p1 > p2 strictly");
}

int pick_argmin(const std::vector<double>& j, bool& tie) {
    int best = 0;
    for (int m = 1; m < static_cast<int>(j.size()); ++m)
        if (j[static_cast<size_t>(m)] < j[static_cast<size_t>(best)]) best = m;
    tie = false;
    const double jb = j[static_cast<size_t>(best)];
    for (int m = 0; m < static_cast<int>(j.size()); ++m)
        if (m != best && std::fabs(j[static_cast<size_t>(m)] - jb) <= 1e-12 * std::max(1.0, std::fabs(jb)))
            tie = true;
    return best;
}

RateReport report_from_components(std::vector<double> j) {
    RateReport r;
    bool tie = false;
    const int best = pick_argmin(j, tie);
    const double jmin = j[static_cast<size_t>(best)];
    r.rate = (jmin == 0.0) ? kInf : 1.0 / jmin;  // J = 0 signals divergence
    r.argmin_index = best;
    r.argmin_tie = tie;
    r.components = std::move(j);
    return r;
}

}  // namespace

double kl_bernoulli(double a, double b) {
    if (!(a > 0.0 && a < 1.0) || !(b > 0.0 && b < 1.0))
        throw std::invalid_argument("kl_bernoulli: arguments must lie in (0,1)");
    return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

double kl_categorical(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("kl_categorical: length mismatch");
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] < 0.0 || b[i] < 0.0)
            throw std::invalid_argument("kl_categorical: negative entry");
        if (a[i] == 0.0) continue;
        if (b[i] == 0.0) return kInf;
        sum += a[i] * std::log(a[i] / b[i]);
    }
    return sum;
}

RateReport rate_known(const Prior& prior, int aggregation_level) {
    require_strict_mode(prior, "rate_known");
    if (aggregation_level < 2)
        throw std::invalid_argument("rate_known: aggregation level must be >= 2");
    RateReport r;
    if (aggregation_level == 2) {
        r.rate = 1.0 / kl_bernoulli(prior[0], prior[1]);
    } else {
        r.rate = 1.0 / ((prior[0] - prior[1]) * std::log(prior[0] / prior[1]));
    }
    return r;
}

RateReport rate_prior_free(const Prior& prior) {
    require_strict_mode(prior, "rate_prior_free");
    const double p1 = prior[0], p2 = prior[1];
    if (!(p2 > 0.0)) throw std::invalid_argument("rate_prior_free: requires p2 > 0");
    const double mid = (p1 + p2) / 2.0;
    RateReport r;
    r.rate = 1.0 / (p1 * std::log(p1 / mid) + p2 * std::log(p2 / mid));
    return r;
}

RateReport rate_uncertain(const Prior& truth, const HyperPrior& hyper, int aggregation_level) {
    require_strict_mode(truth, "rate_uncertain");
    if (hyper.candidates.empty()) throw std::invalid_argument("rate_uncertain: no candidates");
    if (aggregation_level < 2)
        throw std::invalid_argument("rate_uncertain: aggregation level must be >= 2");

    const int m_count = hyper.size();
    std::vector<double> j(static_cast<size_t>(m_count));

    if (aggregation_level == 2) {
        const double p1 = truth[0];
        const double rho = p1 / (1.0 - p1);
        for (int m = 0; m < m_count; ++m) {
            const Prior& cand = hyper.candidates[static_cast<size_t>(m)];
            const double p2m = cand[1];
            double val = (p2m > 0.0 && p2m < 1.0) ? kl_bernoulli(p1, p2m) : kInf;
            if (std::isfinite(val)) {
                const double rho_dagger = cand[0] / (1.0 - p2m);
                if (rho < rho_dagger && rho < 1.0)
                    val += (1.0 - p1) * kl_bernoulli_ext(rho, rho_dagger);
            }
            j[static_cast<size_t>(m)] = val;
        }
        return report_from_components(std::move(j));
    }

    // L >= 3 branch; L beyond the common slot count carries no extra information
    const int k_common = std::max(truth.size(), hyper.num_slots());
    const Prior t = truth.size() < k_common ? truth.padded(k_common) : truth;
    const int l = std::min(aggregation_level, std::max(3, k_common));
    auto at = [](const Prior& p, int i) { return i < p.size() ? p[i] : 0.0; };

    // summing the actual tail entries keeps ratios like p_L / tail exact when
    // a support ends right at slot L
    auto tail_mass = [&at](const Prior& p, int from) {
        double s = 0.0;
        for (int i = from; i < p.size(); ++i) s += at(p, i);
        return s;
    };

    std::vector<double> p_l;  // (p_1, ..., p_{L-1}, tail mass)
    for (int i = 0; i < l - 1; ++i) p_l.push_back(at(t, i));
    const double tail_truth = tail_mass(t, l - 1);
    p_l.push_back(tail_truth);
    const double rho_l = (tail_truth > 0.0) ? at(t, l - 2) / tail_truth : kInf;

    for (int m = 0; m < m_count; ++m) {
        const Prior& cand = hyper.candidates[static_cast<size_t>(m)];
        std::vector<double> swapped;  // (p_2m, p_1m, p_3m, ..., p_{L-1,m}, tail mass)
        swapped.push_back(at(cand, 1));
        swapped.push_back(at(cand, 0));
        for (int i = 2; i < l - 1; ++i) swapped.push_back(at(cand, i));
        const double tail_cand = tail_mass(cand, l - 1);
        swapped.push_back(tail_cand);

        double val = kl_categorical(p_l, swapped);
        if (std::isfinite(val) && tail_truth > 0.0 && rho_l < 1.0) {
            const double rho_l_m = (tail_cand > 0.0) ? at(cand, l - 1) / tail_cand : kInf;
            if (rho_l < rho_l_m)
                val += tail_truth * kl_bernoulli_ext(rho_l, rho_l_m);
        }
        j[static_cast<size_t>(m)] = val;
    }
    return report_from_components(std::move(j));
}

}  // namespace seqstop
