#include "pisync/topology.hpp"

#include <algorithm>
#include <queue>

namespace pisync {

Topology Topology::line(int n) {
    if (n < 1)
        throw ConfigError("line topology needs at least one node");
    Topology t;
    t.node_count = n;
    t.tag = "line(" + std::to_string(n) + ")";
    for (int i = 1; i < n; ++i) {
        t.edges.emplace_back(i, i + 1);
        t.edges.emplace_back(i + 1, i);
    }
    return t;
}

Topology Topology::grid(int rows, int cols) {
    if (rows < 1 || cols < 1)
        throw ConfigError("grid topology needs positive dimensions");
    Topology t;
    t.node_count = rows * cols;
    t.tag = "grid(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
    auto id = [cols](int r, int c) { return r * cols + c + 1; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) {
                t.edges.emplace_back(id(r, c), id(r, c + 1));
                t.edges.emplace_back(id(r, c + 1), id(r, c));
            }
            if (r + 1 < rows) {
                t.edges.emplace_back(id(r, c), id(r + 1, c));
                t.edges.emplace_back(id(r + 1, c), id(r, c));
            }
        }
    }
    return t;
}

Topology Topology::complete(int n) {
    if (n < 1)
        throw ConfigError("complete topology needs at least one node");
    Topology t;
    t.node_count = n;
    t.tag = "complete(" + std::to_string(n) + ")";
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            if (i != j)
                t.edges.emplace_back(i, j);
    return t;
}

Topology Topology::custom(int n, std::vector<std::pair<int, int>> edges) {
    Topology t;
    t.node_count = n;
    t.edges = std::move(edges);
    t.tag = "custom(" + std::to_string(n) + ")";
    t.validate();
    return t;
}

void Topology::validate() const {
    if (node_count < 1)
        throw ConfigError("topology needs at least one node");
    for (auto [i, j] : edges) {
        if (i == j)
            throw ConfigError("self-loop on node " + std::to_string(i));
        if (i < 1 || i > node_count || j < 1 || j > node_count)
            throw ConfigError("edge endpoint out of range: " + std::to_string(i) +
                              "->" + std::to_string(j));
    }
}

std::vector<std::vector<int>> Topology::out_adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count) + 1);
    for (auto [i, j] : edges)
        adj[static_cast<std::size_t>(i)].push_back(j);
    for (auto& v : adj)
        std::sort(v.begin(), v.end());
    return adj;
}

std::vector<std::vector<int>> Topology::neighbor_sets() const {
    std::vector<std::vector<int>> nb(static_cast<std::size_t>(node_count) + 1);
    for (auto [i, j] : edges) {
        nb[static_cast<std::size_t>(i)].push_back(j);
        nb[static_cast<std::size_t>(j)].push_back(i);
    }
    for (auto& v : nb) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return nb;
}

namespace {

std::vector<int> bfs_depths(const std::vector<std::vector<int>>& nb, int start) {
    std::vector<int> depth(nb.size(), -1);
    std::queue<int> q;
    depth[static_cast<std::size_t>(start)] = 0;
    q.push(start);
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : nb[static_cast<std::size_t>(u)]) {
            if (depth[static_cast<std::size_t>(v)] < 0) {
                depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
                q.push(v);
            }
        }
    }
    return depth;
}

} // namespace

bool Topology::weakly_connected() const {
    if (node_count <= 1)
        return true;
    auto depth = bfs_depths(neighbor_sets(), 1);
    for (int i = 1; i <= node_count; ++i)
        if (depth[static_cast<std::size_t>(i)] < 0)
            return false;
    return true;
}

int Topology::diameter() const {
    auto nb = neighbor_sets();
    int best = 0;
    for (int s = 1; s <= node_count; ++s) {
        auto depth = bfs_depths(nb, s);
        for (int i = 1; i <= node_count; ++i) {
            if (depth[static_cast<std::size_t>(i)] < 0)
                return -1;
            best = std::max(best, depth[static_cast<std::size_t>(i)]);
        }
    }
    return best;
}

} // namespace pisync
