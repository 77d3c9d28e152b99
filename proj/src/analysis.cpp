#include "pisync/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace pisync::analysis {

std::array<std::array<double, 2>, 2> ErrorDynamics::matrix() const {
    double bf = beacon_period * true_freq;
    return {{{1.0 - proportional_gain - integral_gain * bf, bf},
             {-integral_gain, 1.0}}};
}

EigenPair eigenvalues(const ErrorDynamics& dynamics) {
    double b = dynamics.proportional_gain;
    double abf = dynamics.integral_gain * dynamics.beacon_period * dynamics.true_freq;
    double trace = 2.0 - b - abf;
    double disc = (b + abf) * (b + abf) - 4.0 * abf;
    std::complex<double> root =
        disc >= 0.0 ? std::complex<double>(std::sqrt(disc), 0.0)
                    : std::complex<double>(0.0, std::sqrt(-disc));
    return EigenPair{(trace - root) / 2.0, (trace + root) / 2.0};
}

AlphaInterval stability_region(double proportional_gain, double beacon_period,
                               double true_freq) {
    if (proportional_gain <= 0.0 || proportional_gain >= 2.0)
        return {};
    return AlphaInterval{0.0, 2.0 * (2.0 - proportional_gain) /
                                  (true_freq * beacon_period)};
}

OptimalGain optimal_alpha(double proportional_gain, double beacon_period,
                          double true_freq) {
    if (proportional_gain <= 0.0 || proportional_gain >= 2.0)
        throw std::domain_error("proportional gain must lie in (0, 2)");
    return OptimalGain{(2.0 - proportional_gain) / (true_freq * beacon_period),
                       std::sqrt(std::abs(1.0 - proportional_gain))};
}

double proportional_only_steady_state(double proportional_gain, double beacon_period,
                                      double true_freq, double nominal_freq) {
    if (proportional_gain <= 0.0 || proportional_gain >= 2.0)
        throw std::domain_error("proportional gain must lie in (0, 2)");
    return beacon_period * (true_freq - nominal_freq) /
           (proportional_gain * nominal_freq);
}

NoiseSpec NoiseSpec::from_eta(double eta_t, double eta_w, double nominal_freq) {
    return NoiseSpec{eta_t * eta_t / (nominal_freq * nominal_freq),
                     eta_w * eta_w * nominal_freq * nominal_freq};
}

double NoiseSpec::eta_t(double nominal_freq) const {
    return std::sqrt(timestamp_variance) * nominal_freq;
}

double NoiseSpec::eta_w(double nominal_freq) const {
    return std::sqrt(jitter_variance) / nominal_freq;
}

double steady_state_variance(double alpha, double beacon_period, double nominal_freq,
                             const NoiseSpec& noise) {
    double B = beacon_period;
    double f = nominal_freq;
    double eta_t2 = noise.timestamp_variance * f * f;
    double eta_w2 = noise.jitter_variance / (f * f);
    double denom = 2.0 * B * f - alpha * B * B * f * f * (1.0 + eta_w2);
    if (alpha < 0.0 || denom <= 0.0)
        throw std::domain_error("steady-state variance unbounded at this integral gain");
    double numer =
        2.0 * alpha * B * B * (eta_t2 + eta_w2 * f * f * B * B) * (1.0 + eta_w2);
    return numer / denom + eta_t2 / (f * f) + 2.0 * eta_w2 * B * B;
}

double multihop_variance(int hops, double base_variance) {
    if (hops < 1)
        throw std::domain_error("hop distance must be at least 1");
    return static_cast<double>(hops) * base_variance;
}

LineFit least_squares_pairwise(std::span<const double> remote_seconds,
                               std::span<const std::int64_t> local_ticks) {
    if (remote_seconds.size() != local_ticks.size())
        throw std::invalid_argument("sample lists must have equal length");
    std::size_t n = local_ticks.size();
    if (n < 2)
        throw std::domain_error("least-squares fit needs at least two samples");

    // Centered normal equations; tick counts can be ~1e12 so the shift keeps
    // the products well conditioned.
    double mean_s = 0.0, mean_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_s += static_cast<double>(local_ticks[i]);
        mean_t += remote_seconds[i];
    }
    mean_s /= static_cast<double>(n);
    mean_t /= static_cast<double>(n);

    double var = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ds = static_cast<double>(local_ticks[i]) - mean_s;
        var += ds * ds;
        cov += ds * (remote_seconds[i] - mean_t);
    }
    if (var == 0.0)
        throw std::domain_error("degenerate sample set: identical local tick values");

    double rate = cov / var;
    return LineFit{mean_t - rate * mean_s, rate};
}

} // namespace pisync::analysis
