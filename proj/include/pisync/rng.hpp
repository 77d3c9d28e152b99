#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace pisync {

// Single deterministic randomness source. One simulation owns exactly one Rng;
// all draws happen in event-processing order and draws for disabled noise
// sources are skipped entirely, so the stream is reproducible from the seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller without a cached spare, two uniform draws per sample.
    double normal(double mean, double std_dev) {
        double u1 = 1.0 - uniform01(); // (0, 1], keeps the log finite
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + std_dev * r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace pisync
