#include "pisync/controller.hpp"

#include <algorithm>
#include <cmath>

namespace pisync {

void PiParams::validate() const {
    if (beacon_period <= 0.0)
        throw ContractViolation("beacon period must be positive");
    if (nominal_freq <= 0.0)
        throw ContractViolation("nominal frequency must be positive");
    if (drift_bound < 0.0 || drift_bound >= nominal_freq)
        throw ContractViolation("drift bound must lie in [0, nominal frequency)");
}

PiDesign design_defaults(const PiParams& params) {
    params.validate();
    return PiDesign{
        1.0,
        1.0 / (params.nominal_freq * params.beacon_period),
        2.0 * (params.drift_bound / params.nominal_freq) * params.beacon_period,
    };
}

double adapt_integral_gain(double error, std::optional<double> prev_error,
                           const PiGains& gains) {
    if (std::abs(error) > gains.error_band)
        return 0.0;
    // No in-band history yet, or the previous error was out of band: restart
    // the integrator at full strength.
    if (!prev_error || std::abs(*prev_error) > gains.error_band)
        return gains.integral_gain_max;
    double prev = *prev_error;
    double scale;
    if (prev == 0.0 || error == prev) {
        scale = 1.0; // division guard
    } else {
        scale = std::abs(prev / (error - prev));
        if (gains.integral_gain > 0.0)
            scale = std::min(scale, gains.integral_gain_max / gains.integral_gain);
    }
    return std::min(scale * gains.integral_gain, gains.integral_gain_max);
}

PiStep pi_step(double error, const PiGains& gains) {
    PiGains next = gains;
    next.integral_gain = adapt_integral_gain(error, gains.prev_error, gains);
    next.prev_error = error;
    bool in_band = std::abs(error) <= gains.error_band;
    next.integrator_active = in_band && next.integral_gain > 0.0;
    double rate_delta = in_band ? next.integral_gain * error : 0.0;
    return PiStep{gains.proportional_gain * error, rate_delta, next};
}

double delay_compensated_error(double remote_estimate, double local_estimate_at_rx,
                               double mean_delay, double rate_multiplier,
                               double nominal_freq) {
    if (mean_delay < 0.0)
        throw ContractViolation("mean delay estimate must be nonnegative");
    return remote_estimate - local_estimate_at_rx +
           mean_delay * nominal_freq * rate_multiplier;
}

} // namespace pisync
