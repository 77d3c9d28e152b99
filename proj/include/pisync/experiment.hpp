#pragma once

#include <complex>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pisync/analysis.hpp"
#include "pisync/config.hpp"
#include "pisync/simulator.hpp"

namespace pisync {

// Post-convergence skew extrema for one (config, seed) cell, seconds.
struct SummaryRow {
    std::string protocol;
    std::string topology;
    std::uint64_t seed = 0;
    double max_global = 0.0;
    double max_avg_global = 0.0;
    double max_local = 0.0;
    double max_avg_local = 0.0;
    double convergence_time = -1.0; // -1 when the run never settles
};

// First sample time after which the average global skew stays at or below
// twice its mean over the final tenth of the samples; -1 when none qualifies.
double detect_convergence(std::span<const MetricsSample> metrics);

SummaryRow summarize(const TraceLog& trace, const SimConfig& config,
                     std::uint64_t seed);

// CSV emission. Formats are pinned so identical runs produce identical bytes:
// times as %.3f, skews as microseconds with three decimals, estimates with
// nine decimals, rates in scientific notation.
std::string metrics_csv(const TraceLog& trace);
std::string nodes_csv(const TraceLog& trace);
std::string summary_csv(std::span<const SummaryRow> rows);

struct ExperimentResult {
    std::vector<SummaryRow> rows;
    std::vector<std::filesystem::path> files;
};

// Runs every seed (optionally fanned out over `jobs` threads; cells are
// independent and results are assembled in seed order), writing
// metrics_<seed>.csv, nodes_<seed>.csv and summary.csv under outdir.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& outdir, int jobs = 1);

// Closed-form sweep tables backing the `analyze` subcommand.
struct EigRow {
    double alpha;
    std::complex<double> z1, z2;
    double spectral_radius;
    int iterations_to_90; // -1 outside the stable region
    bool stable;
};

std::vector<EigRow> eigenvalue_sweep(double beta, double beacon_period, double freq,
                                     std::span<const double> alphas);

struct VarianceRow {
    double alpha;
    bool bounded;
    double variance; // seconds^2, meaningful only when bounded
};

std::vector<VarianceRow> variance_sweep(double beacon_period, double freq,
                                        const analysis::NoiseSpec& noise,
                                        std::span<const double> alphas);

std::string eig_csv(std::span<const EigRow> rows);
std::string variance_csv(std::span<const VarianceRow> rows);
std::string sweep_csv(std::span<const EigRow> eig, std::span<const VarianceRow> var);

// Recomputes the metrics stream from a node-trace CSV (as written by
// nodes_csv) against the given topology.
std::string recompute_metrics_csv(std::istream& node_trace, const Topology& topology);

} // namespace pisync
