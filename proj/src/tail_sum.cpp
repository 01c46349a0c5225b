#include "seqstop/tail_sum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqstop {

namespace {

// coefficients of G_j(z) = sum_{r=0}^{rmax} (p z)^r / r!, normalized so the
// largest is 1; the dropped factor is returned through `log_norm`
std::vector<double> label_coeffs(double p, int rmax, double& log_norm) {
    std::vector<double> lg(static_cast<size_t>(rmax) + 1);
    double best = 0.0;  // r = 0 term is exactly 1
    lg[0] = 0.0;
    for (int r = 1; r <= rmax; ++r) {
        lg[static_cast<size_t>(r)] = r * std::log(p) - std::lgamma(r + 1.0);
        best = std::max(best, lg[static_cast<size_t>(r)]);
    }
    std::vector<double> g(lg.size());
    for (size_t i = 0; i < lg.size(); ++i) g[i] = std::exp(lg[i] - best);
    log_norm = best;
    return g;
}

// rescale so max |x| = 1, accumulating the factor into log_scale
void renormalize(std::vector<double>& a, double& log_scale) {
    double m = 0.0;
    for (double x : a) m = std::max(m, x);
    if (m <= 0.0 || m == 1.0) return;
    double lm = std::log(m);
    for (double& x : a) x /= m;
    log_scale += lm;
}

// number of tail labels that can actually receive samples
std::vector<double> positive_probs(const TailSpec& spec) {
    std::vector<double> out;
    out.reserve(spec.tail_probs.size());
    for (double p : spec.tail_probs)
        if (p > 0.0) out.push_back(p);
    return out;
}

}  // namespace

void TailSpec::validate() const {
    if (cap < 1) throw std::invalid_argument("tail spec: cap must be >= 1");
    if (head_tie_count < 1) throw std::invalid_argument("tail spec: head tie count must be >= 1");
    if (residual < 0) throw std::invalid_argument("tail spec: negative residual");
    for (double p : tail_probs)
        if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("tail spec: probability outside [0,1]");
}

ScaledValue tail_sum(const TailSpec& spec) {
    spec.validate();
    if (spec.residual == 0) return ScaledValue::one();

    const std::vector<double> probs = positive_probs(spec);
    const long long capacity = static_cast<long long>(spec.cap) * static_cast<long long>(probs.size());
    if (capacity < spec.residual) return ScaledValue::zero();

    const int nbar = spec.residual;
    const int rmax = std::min(spec.cap, nbar);

    std::vector<double> acc(static_cast<size_t>(nbar) + 1, 0.0);
    std::vector<double> next(acc.size());
    acc[0] = 1.0;
    double log_scale = 0.0;

    for (double p : probs) {
        double log_norm = 0.0;
        const std::vector<double> g = label_coeffs(p, rmax, log_norm);
        std::fill(next.begin(), next.end(), 0.0);
        for (int t = 0; t <= nbar; ++t) {
            const double a = acc[static_cast<size_t>(t)];
            if (a == 0.0) continue;
            const int rlim = std::min(rmax, nbar - t);
            for (int r = 0; r <= rlim; ++r)
                next[static_cast<size_t>(t + r)] += a * g[static_cast<size_t>(r)];
        }
        acc.swap(next);
        log_scale += log_norm;
        renormalize(acc, log_scale);
    }

    const double coeff = acc[static_cast<size_t>(nbar)];
    if (coeff == 0.0) return ScaledValue::zero();
    return {coeff, log_scale + std::lgamma(nbar + 1.0)};
}

ScaledValue tilde_tail_sum(const TailSpec& spec) {
    spec.validate();
    if (spec.residual == 0) return ScaledValue::one();

    const std::vector<double> probs = positive_probs(spec);
    const long long capacity = static_cast<long long>(spec.cap) * static_cast<long long>(probs.size());
    if (capacity < spec.residual) return ScaledValue::zero();

    const int nbar = spec.residual;
    const int mmax = std::min(static_cast<int>(spec.tail_probs.size()), nbar / spec.cap);
    const int rmax = std::min(spec.cap, nbar);

    // acc[m][t] = [u^m z^t] of the partial product, u marking cap hits
    auto idx = [&](int m, int t) { return static_cast<size_t>(m) * (nbar + 1) + static_cast<size_t>(t); };
    std::vector<double> acc(static_cast<size_t>(mmax + 1) * (nbar + 1), 0.0);
    std::vector<double> next(acc.size());
    acc[idx(0, 0)] = 1.0;
    double log_scale = 0.0;

    for (double p : probs) {
        double log_norm = 0.0;
        const std::vector<double> g = label_coeffs(p, rmax, log_norm);
        std::fill(next.begin(), next.end(), 0.0);
        for (int m = 0; m <= mmax; ++m) {
            for (int t = 0; t <= nbar; ++t) {
                const double a = acc[idx(m, t)];
                if (a == 0.0) continue;
                const int rlim = std::min(spec.cap - 1, nbar - t);
                for (int r = 0; r <= rlim; ++r)
                    next[idx(m, t + r)] += a * g[static_cast<size_t>(r)];
                if (t + spec.cap <= nbar && m + 1 <= mmax)
                    next[idx(m + 1, t + spec.cap)] += a * g[static_cast<size_t>(spec.cap)];
            }
        }
        acc.swap(next);
        log_scale += log_norm;
        renormalize(acc, log_scale);
    }

    // w(m) = 1 / binom(c'_d + m, c'_d)
    double total = 0.0;
    for (int m = 0; m <= mmax; ++m) {
        const double coeff = acc[idx(m, nbar)];
        if (coeff == 0.0) continue;
        double binom = 1.0;
        for (int i = 1; i <= m; ++i) binom *= static_cast<double>(spec.head_tie_count + i) / i;
        total += coeff / binom;
    }
    if (total == 0.0) return ScaledValue::zero();
    return {total, log_scale + std::lgamma(nbar + 1.0)};
}

double tail_sum_bruteforce(const TailSpec& spec, bool weighted, long long budget) {
    spec.validate();
    if (spec.residual == 0) return 1.0;

    const int labels = static_cast<int>(spec.tail_probs.size());
    long long steps = 0;
    double total = 0.0;
    std::vector<int> alloc(static_cast<size_t>(labels), 0);

    // depth-first over allocation vectors r with r_j <= cap, sum r_j = residual
    auto recurse = [&](auto&& self, int j, int remaining) -> void {
        if (++steps > budget)
            throw std::runtime_error("tail_sum_bruteforce: enumeration budget exceeded");
        if (j == labels) {
            if (remaining != 0) return;
            double log_term = std::lgamma(spec.residual + 1.0);
            int cap_hits = 0;
            for (int i = 0; i < labels; ++i) {
                const int r = alloc[static_cast<size_t>(i)];
                if (r == 0) continue;
                const double p = spec.tail_probs[static_cast<size_t>(i)];
                if (p == 0.0) return;  // impossible allocation
                log_term += r * std::log(p) - std::lgamma(r + 1.0);
                if (r == spec.cap) ++cap_hits;
            }
            double weight = 1.0;
            if (weighted && cap_hits > 0) {
                double binom = 1.0;
                for (int i = 1; i <= cap_hits; ++i)
                    binom *= static_cast<double>(spec.head_tie_count + i) / i;
                weight = 1.0 / binom;
            }
            total += weight * std::exp(log_term);
            return;
        }
        const long long left_capacity = static_cast<long long>(spec.cap) * (labels - j - 1);
        for (int r = 0; r <= std::min(spec.cap, remaining); ++r) {
            if (remaining - r > left_capacity) continue;  // cannot finish
            alloc[static_cast<size_t>(j)] = r;
            self(self, j + 1, remaining - r);
        }
        alloc[static_cast<size_t>(j)] = 0;
    };
    recurse(recurse, 0, spec.residual);
    return total;
}

}  // namespace seqstop
