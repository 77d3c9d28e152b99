#pragma once

// Shared test-side oracles and estimators. Everything here is deliberately
// independent of the library's implementation paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pisync/metrics.hpp"
#include "pisync/topology.hpp"

namespace testsupport {

// Direct enumeration over all pairs and all edges.
inline pisync::MetricsSample
brute_force_metrics(double time, const std::vector<std::pair<int, double>>& values,
                    const pisync::Topology& topo) {
    pisync::MetricsSample s;
    s.time = time;
    if (values.size() < 2) {
        s.valid = false;
        return s;
    }
    double global_sum = 0.0;
    for (auto [i, vi] : values) {
        double worst = 0.0;
        for (auto [j, vj] : values)
            worst = std::max(worst, std::abs(vi - vj));
        global_sum += worst;
        s.max_global = std::max(s.max_global, worst);
    }
    s.avg_global = global_sum / static_cast<double>(values.size());

    auto neighbors = topo.neighbor_sets();
    double local_sum = 0.0;
    for (auto [i, vi] : values) {
        double worst = 0.0;
        for (auto [j, vj] : values) {
            const auto& nb = neighbors[static_cast<std::size_t>(i)];
            if (std::find(nb.begin(), nb.end(), j) == nb.end())
                continue;
            worst = std::max(worst, std::abs(vi - vj));
        }
        local_sum += worst;
        s.max_local = std::max(s.max_local, worst);
    }
    s.avg_local = local_sum / static_cast<double>(values.size());
    return s;
}

// Dominant decay modulus of a (possibly oscillating) second-order sequence,
// estimated by a least-squares fit of the two-term linear recursion
// e[h+2] = p e[h+1] + q e[h] and taking the larger root modulus. Falls back
// to a one-term ratio fit when the two columns are numerically collinear.
inline double estimate_decay_modulus(std::span<const double> e) {
    std::size_t usable = e.size();
    if (usable < 4)
        return -1.0;

    double s11 = 0, s00 = 0, s10 = 0, r1 = 0, r0 = 0;
    for (std::size_t h = 0; h + 2 < usable; ++h) {
        double e0 = e[h], e1 = e[h + 1], e2 = e[h + 2];
        s11 += e1 * e1;
        s00 += e0 * e0;
        s10 += e1 * e0;
        r1 += e2 * e1;
        r0 += e2 * e0;
    }
    double det = s11 * s00 - s10 * s10;
    if (det <= 1e-12 * s11 * s00) {
        // Effectively first order: plain ratio estimate.
        double num = 0, den = 0;
        for (std::size_t h = 0; h + 1 < usable; ++h) {
            num += e[h + 1] * e[h];
            den += e[h] * e[h];
        }
        return den > 0 ? std::abs(num / den) : -1.0;
    }
    double p = (r1 * s00 - r0 * s10) / det;
    double q = (r0 * s11 - r1 * s10) / det;
    double disc = p * p + 4.0 * q;
    if (disc >= 0.0) {
        double root = std::sqrt(disc);
        return std::max(std::abs((p + root) / 2.0), std::abs((p - root) / 2.0));
    }
    return std::sqrt(std::abs(-q)); // complex pair: modulus sqrt(|q|)
}

inline double mean(std::span<const double> xs) {
    double sum = 0;
    for (double x : xs)
        sum += x;
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

inline double second_moment(std::span<const double> xs) {
    double sum = 0;
    for (double x : xs)
        sum += x * x;
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

inline double variance(std::span<const double> xs) {
    double m = mean(xs);
    double sum = 0;
    for (double x : xs)
        sum += (x - m) * (x - m);
    return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

inline double max_abs(std::span<const double> xs) {
    double m = 0;
    for (double x : xs)
        m = std::max(m, std::abs(x));
    return m;
}

// Least-squares slope of y against x.
inline double regression_slope(std::span<const double> x, std::span<const double> y) {
    double mx = mean(x), my = mean(y);
    double cov = 0, var = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        var += (x[i] - mx) * (x[i] - mx);
    }
    return cov / var;
}

// Slope of a line through the origin.
inline double origin_slope(std::span<const double> x, std::span<const double> y) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += x[i] * y[i];
        den += x[i] * x[i];
    }
    return num / den;
}

} // namespace testsupport
