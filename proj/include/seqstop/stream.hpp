#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace seqstop {

// splitmix64 step; the standard way to spread a seed into decorrelated streams
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Counter-derived sub-seed: deterministic in (master, a, b) and independent
// of execution order, so parallel trial batches reproduce exactly.
inline uint64_t derive_seed(uint64_t master, uint64_t a, uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

// uniform double in [0, 1) with 53 random bits; avoids the
// implementation-defined std::uniform_real_distribution
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// IID categorical draws over slot indices; deterministic given the seed and
// identical across platforms.
class CategoricalSampler {
public:
    CategoricalSampler(const std::vector<double>& probs, uint64_t seed) : rng_(seed) {
        if (probs.empty()) throw std::invalid_argument("sampler: empty probability vector");
        cum_.reserve(probs.size());
        double acc = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw std::invalid_argument("sampler: negative probability");
            acc += p;
            cum_.push_back(acc);
        }
        if (acc <= 0.0) throw std::invalid_argument("sampler: zero total mass");
        for (double& c : cum_) c /= acc;
        cum_.back() = 1.0;
    }

    int next() {
        const double u = uniform_unit(rng_);
        // linear walk; slot probabilities are front-loaded by construction
        for (size_t i = 0; i + 1 < cum_.size(); ++i)
            if (u < cum_[i]) return static_cast<int>(i);
        return static_cast<int>(cum_.size()) - 1;
    }

    std::function<int()> as_stream() {
        return [this]() { return next(); };
    }

private:
    std::vector<double> cum_;
    std::mt19937_64 rng_;
};

}  // namespace seqstop
