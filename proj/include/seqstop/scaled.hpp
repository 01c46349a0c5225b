#pragma once

#include <cmath>
#include <limits>

namespace seqstop {

// Nonnegative quantity stored as value * exp(log_scale).  Keeps dynamic range
// far beyond double while staying in plain floating point; the mantissa is
// renormalized by the producer whenever it drifts.
struct ScaledValue {
    double value = 0.0;
    double log_scale = 0.0;

    static ScaledValue zero() { return {0.0, 0.0}; }
    static ScaledValue one() { return {1.0, 0.0}; }
    static ScaledValue from_log(double lg) { return {1.0, lg}; }

    bool is_zero() const { return value == 0.0; }

    // log of the represented value; -inf for zero
    double log() const {
        if (value == 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(value) + log_scale;
    }

    double to_double() const { return value * std::exp(log_scale); }
};

// Streaming log-sum-exp: accumulates sum_i exp(log_i) while tracking the
// running maximum so the partial sum never overflows or flushes to zero.
class LogSumAccumulator {
public:
    void add(double log_term) {
        if (std::isinf(log_term) && log_term < 0) return;
        if (empty_) {
            max_ = log_term;
            sum_ = 1.0;
            empty_ = false;
            return;
        }
        if (log_term <= max_) {
            sum_ += std::exp(log_term - max_);
        } else {
            sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
            max_ = log_term;
        }
    }

    bool empty() const { return empty_; }

    // log of the accumulated sum; -inf when nothing was added
    double log() const {
        if (empty_) return -std::numeric_limits<double>::infinity();
        return max_ + std::log(sum_);
    }

private:
    bool empty_ = true;
    double max_ = 0.0;
    double sum_ = 0.0;
};

}  // namespace seqstop
