#include "pisync/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pisync {

MetricsSample compute_metrics(double time,
                              std::span<const std::pair<int, double>> values,
                              const Topology& topology) {
    MetricsSample s;
    s.time = time;
    if (values.size() < 2) {
        s.valid = false;
        return s;
    }

    // Estimates indexed by node id; NaN marks unpowered nodes.
    std::vector<double> estimate(static_cast<std::size_t>(topology.node_count) + 1,
                                 std::numeric_limits<double>::quiet_NaN());
    double lo = values.front().second;
    double hi = lo;
    for (auto [id, v] : values) {
        estimate[static_cast<std::size_t>(id)] = v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    s.max_global = hi - lo;
    double global_sum = 0.0;
    for (auto [id, v] : values)
        global_sum += std::max(v - lo, hi - v);
    s.avg_global = global_sum / static_cast<double>(values.size());

    auto neighbors = topology.neighbor_sets();
    double local_sum = 0.0;
    for (auto [id, v] : values) {
        double worst = 0.0;
        for (int j : neighbors[static_cast<std::size_t>(id)]) {
            double other = estimate[static_cast<std::size_t>(j)];
            if (std::isnan(other))
                continue;
            worst = std::max(worst, std::abs(v - other));
        }
        local_sum += worst;
        s.max_local = std::max(s.max_local, worst);
    }
    s.avg_local = local_sum / static_cast<double>(values.size());
    return s;
}

} // namespace pisync
