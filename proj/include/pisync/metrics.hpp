#pragma once

#include <span>
#include <utility>

#include "pisync/topology.hpp"

namespace pisync {

// Instantaneous skew metrics over the powered part of the network, seconds.
//   max_global: largest pairwise estimate difference
//   avg_global: mean over nodes of each node's largest difference to any node
//   max_local:  largest difference across an edge
//   avg_local:  mean over nodes of each node's largest difference to a neighbor
struct MetricsSample {
    double time = 0.0;
    double max_global = 0.0;
    double avg_global = 0.0;
    double max_local = 0.0;
    double avg_local = 0.0;
    bool valid = true; // false when fewer than two nodes were powered
};

// values holds (node id, time estimate) for each powered node. Global metrics
// use running extrema; local metrics walk the edge set restricted to powered
// endpoints.
MetricsSample compute_metrics(double time,
                              std::span<const std::pair<int, double>> values,
                              const Topology& topology);

} // namespace pisync
