#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pisync/errors.hpp"

namespace pisync {

// Directed communication graph over nodes 1..N. An edge (i, j) means node j
// hears node i's broadcasts.
struct Topology {
    int node_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::string tag;

    static Topology line(int n);
    static Topology grid(int rows, int cols);
    static Topology complete(int n);
    static Topology custom(int n, std::vector<std::pair<int, int>> edges);

    // out_adjacency()[i] lists the nodes hearing node i (1-based, index 0 unused).
    std::vector<std::vector<int>> out_adjacency() const;
    // Undirected neighbor sets, used by the local-skew metrics.
    std::vector<std::vector<int>> neighbor_sets() const;

    bool weakly_connected() const;
    // Longest undirected shortest path; -1 when disconnected.
    int diameter() const;

    void validate() const;
};

} // namespace pisync
