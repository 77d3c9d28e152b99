#pragma once

#include <cstdint>

#include "pisync/errors.hpp"
#include "pisync/rng.hpp"

namespace pisync {

// Per-round oscillator frequency jitter. Uniform draws from
// [-param, +param] (param is the halfwidth), Gaussian draws with standard
// deviation param. The value is held constant between resamples.
struct JitterSpec {
    enum class Kind { None, Uniform, Gaussian };
    Kind kind = Kind::None;
    double param = 0.0;

    bool enabled() const { return kind != Kind::None && param > 0.0; }
    // Standard deviation of the sampled jitter.
    double std_dev() const;
};

// Free-running tick counter driven by an oscillator running at a fixed true
// frequency plus the current jitter value. The counter is the floor of the
// piecewise-linear integral of the instantaneous frequency since the origin.
//
// Reads are monotone: the returned tick count never decreases within one
// power cycle, and requesting a read earlier than the latest access throws.
class HardwareClock {
public:
    HardwareClock(double nominal_freq, double true_freq, JitterSpec jitter = {},
                  double origin = 0.0);

    // Ticks elapsed since the origin at absolute time t_abs.
    std::int64_t read(double t_abs);

    // Absolute time at which the real-valued accumulation reaches
    // target_ticks under the current frequency segment. target_ticks must not
    // lie in the past.
    double time_at_ticks(double target_ticks) const;

    // Records a scheduled tick crossing: target_ticks is taken as the exact
    // counter value at t_abs. This absorbs the sub-tick float wobble of
    // inverting time_at_ticks and keeps crossing reads exact.
    void mark_crossing(double t_abs, std::int64_t target_ticks);

    // Draws a fresh jitter value; a no-op when jitter is disabled so that
    // noiseless runs keep a single exact accumulation segment.
    void resample_jitter(double t_abs, Rng& rng);

    void set_true_freq(double t_abs, double freq);

    // Power cycle: counter back to zero with a fresh origin.
    void restart(double t_abs);

    double nominal_freq() const { return nominal_; }
    double true_freq() const { return true_; }
    double current_jitter() const { return jitter_value_; }
    std::int64_t last_ticks() const { return last_ticks_; }

private:
    void rebase(double t_abs);
    double ticks_real(double t_abs) const;
    void advance(double t_abs);

    double nominal_;
    double true_;
    JitterSpec jitter_;
    double jitter_value_ = 0.0;
    double seg_time_;  // anchor of the current constant-frequency segment
    double seg_ticks_; // real-valued tick count at the anchor
    double last_time_;
    std::int64_t last_ticks_ = 0;
};

// Software time estimate advanced from hardware tick deltas. Between
// corrections the estimate is exactly anchor_estimate + rate * (s - s0).
// The rate multiplier is clamped to [0.5, 2] periods of the nominal
// frequency; clamps are counted so runs can report them.
class LogicalClock {
public:
    explicit LogicalClock(double nominal_freq);

    double read(std::int64_t ticks) const;

    // Shifts the value at `ticks` by `offset` and the rate by `rate_delta`,
    // re-anchoring there.
    void correct(std::int64_t ticks, double offset, double rate_delta);

    // Sets the value at `ticks` to exactly `value` (unit proportional gain
    // jump) and applies `rate_delta`.
    void correct_to(std::int64_t ticks, double value, double rate_delta);

    // Power-on state: estimate = initial_estimate at tick zero, nominal rate.
    void reset(double initial_estimate = 0.0);

    double rate() const { return rate_; }
    double anchor_estimate() const { return anchor_estimate_; }
    std::int64_t anchor_ticks() const { return anchor_ticks_; }
    std::uint64_t clamp_count() const { return clamp_count_; }

private:
    void set_rate(double rate);

    double nominal_freq_;
    double anchor_estimate_ = 0.0;
    double rate_;
    std::int64_t anchor_ticks_ = 0;
    double rate_min_;
    double rate_max_;
    std::uint64_t clamp_count_ = 0;
};

} // namespace pisync
