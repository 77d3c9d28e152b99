#pragma once

#include <algorithm>

#include "pisync/errors.hpp"
#include "pisync/rng.hpp"

namespace pisync {

struct DelayJitter {
    enum class Kind { None, Uniform, Gaussian };
    Kind kind = Kind::None;
    double param = 0.0; // halfwidth (uniform) or standard deviation (gaussian)
};

// Broadcast channel: mean delivery delay plus jitter, i.i.d. drop probability,
// and additive zero-mean Gaussian noise on the received time value.
struct ChannelModel {
    double mean_delay = 0.0;
    DelayJitter delay_jitter;
    double loss_probability = 0.0;
    double timestamp_noise_std = 0.0;

    void validate() const {
        if (mean_delay < 0.0)
            throw ConfigError("mean delay must be nonnegative");
        if (loss_probability < 0.0 || loss_probability > 1.0)
            throw ConfigError("loss probability must lie in [0, 1]");
        if (timestamp_noise_std < 0.0)
            throw ConfigError("timestamp noise must be nonnegative");
    }

    bool randomized_delay() const {
        return delay_jitter.kind != DelayJitter::Kind::None && delay_jitter.param > 0.0;
    }

    // Sampled delays are clamped nonnegative.
    double sample_delay(Rng& rng) const {
        double d = mean_delay;
        if (randomized_delay()) {
            d += delay_jitter.kind == DelayJitter::Kind::Uniform
                     ? rng.uniform(-delay_jitter.param, delay_jitter.param)
                     : rng.normal(0.0, delay_jitter.param);
        }
        return std::max(d, 0.0);
    }
};

} // namespace pisync
