#pragma once

#include <optional>

#include "pisync/errors.hpp"

namespace pisync {

// Static design inputs for gain selection.
struct PiParams {
    double beacon_period; // seconds between broadcasts
    double nominal_freq;  // ticks/second
    double drift_bound;   // max |true - nominal| frequency, ticks/second

    void validate() const;
};

struct PiDesign {
    double proportional_gain; // offset correction weight
    double integral_gain_max; // rate correction weight ceiling
    double error_band;        // errors beyond this are treated as offsets
};

// Deadbeat proportional gain plus the fastest stable integral gain ceiling;
// the error band sits at its lower bound, twice the worst pairwise drift
// accumulated over one beacon period.
PiDesign design_defaults(const PiParams& params);

// Adaptive integral-gain state. The gain lives in [0, integral_gain_max], is
// forced to zero while observed errors exceed the band, restarts from the
// ceiling when errors re-enter the band, and otherwise scales by the ratio of
// the previous error to the error increment (capped at the ceiling).
struct PiGains {
    double proportional_gain = 1.0;
    double integral_gain = 0.0;
    double integral_gain_max = 0.0;
    double error_band = 0.0;
    std::optional<double> prev_error; // none before the first observed error
    bool integrator_active = false;
};

// Next integral gain for an observed error. prev_error == nullopt is treated
// as out-of-band (cold start).
double adapt_integral_gain(double error, std::optional<double> prev_error,
                           const PiGains& gains);

struct PiStep {
    double offset;     // applied to the time estimate
    double rate_delta; // applied to the rate multiplier
    PiGains next;
};

// One controller step on a measured error (remote minus local estimate at
// receipt). The offset term always applies; the rate term only inside the
// error band, using the freshly adapted gain.
PiStep pi_step(double error, const PiGains& gains);

// Measured error corrected by an a-priori mean-delay estimate: the local
// estimate is rolled back by the time it advanced during delivery.
double delay_compensated_error(double remote_estimate, double local_estimate_at_rx,
                               double mean_delay, double rate_multiplier,
                               double nominal_freq);

} // namespace pisync
