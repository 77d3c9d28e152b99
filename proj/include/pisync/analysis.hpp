#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>

namespace pisync::analysis {

// Coefficients of the two-node synchronization-error recursion around the
// synchronized fixed point. One row step advances the pair
// (error, rate multiplier) by one beacon period.
struct ErrorDynamics {
    double proportional_gain; // offset feedback weight
    double integral_gain;     // rate feedback weight
    double beacon_period;     // seconds
    double true_freq;         // ticks/second

    // [[1 - b - a*B*f, B*f], [-a, 1]]
    std::array<std::array<double, 2>, 2> matrix() const;
};

struct EigenPair {
    std::complex<double> z1; // (trace - sqrt(disc)) / 2
    std::complex<double> z2; // (trace + sqrt(disc)) / 2

    double spectral_radius() const { return std::max(std::abs(z1), std::abs(z2)); }
};

// Roots of z^2 - (2 - b - a*B*f) z + (1 - b).
EigenPair eigenvalues(const ErrorDynamics& dynamics);

// Open interval of integral gains with both eigenvalues strictly inside the
// unit circle. Empty for proportional gains outside (0, 2).
struct AlphaInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return !(hi > lo); }
    bool contains(double alpha) const { return alpha > lo && alpha < hi; }
};

AlphaInterval stability_region(double proportional_gain, double beacon_period,
                               double true_freq);

struct OptimalGain {
    double alpha;           // fastest-converging integral gain
    double spectral_radius; // modulus of both eigenvalues at that gain
};

OptimalGain optimal_alpha(double proportional_gain, double beacon_period,
                          double true_freq);

// Residual error once the integrator is disabled: drift accumulated per
// period divided by the proportional gain.
double proportional_only_steady_state(double proportional_gain, double beacon_period,
                                      double true_freq, double nominal_freq);

// Transmission-noise and frequency-jitter variances together with their
// dimensionless forms (scaled by the nominal frequency).
struct NoiseSpec {
    double timestamp_variance = 0.0; // seconds^2, on received time values
    double jitter_variance = 0.0;    // (ticks/second)^2, per-round frequency noise

    static NoiseSpec from_eta(double eta_t, double eta_w, double nominal_freq);
    double eta_t(double nominal_freq) const;
    double eta_w(double nominal_freq) const;
};

// Asymptotic mean-square pairwise error at unit proportional gain. Throws
// std::domain_error when the variance is unbounded at this integral gain.
double steady_state_variance(double alpha, double beacon_period, double nominal_freq,
                             const NoiseSpec& noise);

// Per-hop variance accumulation on a flooding path: exactly linear in the hop
// distance to the reference.
double multihop_variance(int hops, double base_variance);

struct LineFit {
    double offset; // seconds
    double rate;   // seconds/tick
};

// Least-squares (offset, rate) mapping local hardware ticks to remote time
// values. Requires at least two samples with non-identical tick values;
// throws std::domain_error on a degenerate sample set.
LineFit least_squares_pairwise(std::span<const double> remote_seconds,
                               std::span<const std::int64_t> local_ticks);

} // namespace pisync::analysis
