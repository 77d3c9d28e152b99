#include "pisync/clock.hpp"

#include <algorithm>
#include <cmath>

namespace pisync {

double JitterSpec::std_dev() const {
    switch (kind) {
    case Kind::None:
        return 0.0;
    case Kind::Uniform:
        return param / std::sqrt(3.0);
    case Kind::Gaussian:
        return param;
    }
    return 0.0;
}

HardwareClock::HardwareClock(double nominal_freq, double true_freq, JitterSpec jitter,
                             double origin)
    : nominal_(nominal_freq),
      true_(true_freq),
      jitter_(jitter),
      seg_time_(origin),
      seg_ticks_(0.0),
      last_time_(origin) {
    if (nominal_ <= 0.0 || true_ <= 0.0)
        throw ContractViolation("hardware clock frequencies must be positive");
    // A jitter excursion may never stall or reverse the oscillator.
    if (jitter_.enabled() && jitter_.param * 4.0 >= true_)
        throw ContractViolation("frequency jitter too large for the true frequency");
}

double HardwareClock::ticks_real(double t_abs) const {
    return seg_ticks_ + (true_ + jitter_value_) * (t_abs - seg_time_);
}

void HardwareClock::advance(double t_abs) {
    if (t_abs < last_time_)
        throw ContractViolation("non-monotone hardware clock access");
    last_time_ = t_abs;
}

std::int64_t HardwareClock::read(double t_abs) {
    advance(t_abs);
    auto ticks = static_cast<std::int64_t>(std::floor(ticks_real(t_abs)));
    last_ticks_ = std::max(last_ticks_, ticks);
    return last_ticks_;
}

double HardwareClock::time_at_ticks(double target_ticks) const {
    if (target_ticks < seg_ticks_)
        throw ContractViolation("tick target lies before the current segment");
    return seg_time_ + (target_ticks - seg_ticks_) / (true_ + jitter_value_);
}

void HardwareClock::mark_crossing(double t_abs, std::int64_t target_ticks) {
    advance(t_abs);
    last_ticks_ = std::max(last_ticks_, target_ticks);
}

void HardwareClock::rebase(double t_abs) {
    seg_ticks_ = ticks_real(t_abs);
    seg_time_ = t_abs;
}

void HardwareClock::resample_jitter(double t_abs, Rng& rng) {
    if (!jitter_.enabled())
        return;
    advance(t_abs);
    rebase(t_abs);
    jitter_value_ = jitter_.kind == JitterSpec::Kind::Uniform
                        ? rng.uniform(-jitter_.param, jitter_.param)
                        : rng.normal(0.0, jitter_.param);
}

void HardwareClock::set_true_freq(double t_abs, double freq) {
    if (freq <= 0.0)
        throw ContractViolation("true frequency must be positive");
    advance(t_abs);
    rebase(t_abs);
    true_ = freq;
}

void HardwareClock::restart(double t_abs) {
    advance(t_abs);
    seg_time_ = t_abs;
    seg_ticks_ = 0.0;
    jitter_value_ = 0.0;
    last_ticks_ = 0;
}

LogicalClock::LogicalClock(double nominal_freq)
    : nominal_freq_(nominal_freq),
      rate_(1.0 / nominal_freq),
      rate_min_(0.5 / nominal_freq),
      rate_max_(2.0 / nominal_freq) {
    if (nominal_freq <= 0.0)
        throw ContractViolation("nominal frequency must be positive");
}

double LogicalClock::read(std::int64_t ticks) const {
    if (ticks < anchor_ticks_)
        throw ContractViolation("logical clock read before its anchor");
    return anchor_estimate_ + rate_ * static_cast<double>(ticks - anchor_ticks_);
}

void LogicalClock::set_rate(double rate) {
    if (rate < rate_min_) {
        rate_ = rate_min_;
        ++clamp_count_;
    } else if (rate > rate_max_) {
        rate_ = rate_max_;
        ++clamp_count_;
    } else {
        rate_ = rate;
    }
}

void LogicalClock::correct(std::int64_t ticks, double offset, double rate_delta) {
    anchor_estimate_ = read(ticks) + offset;
    anchor_ticks_ = ticks;
    set_rate(rate_ + rate_delta);
}

void LogicalClock::correct_to(std::int64_t ticks, double value, double rate_delta) {
    if (ticks < anchor_ticks_)
        throw ContractViolation("logical clock correction before its anchor");
    anchor_estimate_ = value;
    anchor_ticks_ = ticks;
    set_rate(rate_ + rate_delta);
}

void LogicalClock::reset(double initial_estimate) {
    anchor_estimate_ = initial_estimate;
    anchor_ticks_ = 0;
    rate_ = 1.0 / nominal_freq_;
}

} // namespace pisync
