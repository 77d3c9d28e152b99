#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pisync/simulator.hpp"

namespace pisync {

// One experiment: a simulation template plus the seed list it fans out over.
struct ExperimentConfig {
    SimConfig base;
    std::vector<std::uint64_t> seeds{1};
    std::string name = "experiment";
};

// Flat key-value format with [section] headers, '#' comments, and repeatable
// keys for lifecycle events and custom edges. Errors carry file:line context.
ExperimentConfig parse_config(std::istream& in, const std::string& filename);
ExperimentConfig load_config(const std::string& path);

// "a..b" (inclusive range) or comma-separated list.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

} // namespace pisync
