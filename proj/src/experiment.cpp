#include "pisync/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

namespace pisync {

namespace {

void append_fmt(std::string& out, const char* fmt, auto... args) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    out += buf;
}

double micro(double seconds) { return seconds * 1e6; }

} // namespace

double detect_convergence(std::span<const MetricsSample> metrics) {
    std::vector<const MetricsSample*> valid;
    for (const auto& m : metrics)
        if (m.valid)
            valid.push_back(&m);
    if (valid.empty())
        return -1.0;

    std::size_t window = std::max<std::size_t>(valid.size() / 10, 1);
    double final_mean = 0.0;
    for (std::size_t i = valid.size() - window; i < valid.size(); ++i)
        final_mean += valid[i]->avg_global;
    final_mean /= static_cast<double>(window);
    double threshold = 2.0 * final_mean;

    // Earliest sample from which the series stays at or below the threshold.
    std::size_t k = valid.size();
    for (std::size_t i = valid.size(); i-- > 0;) {
        if (valid[i]->avg_global > threshold)
            break;
        k = i;
    }
    if (k == valid.size())
        return -1.0;
    return valid[k]->time;
}

SummaryRow summarize(const TraceLog& trace, const SimConfig& config,
                     std::uint64_t seed) {
    SummaryRow row;
    row.protocol = protocol_name(config.protocol.kind);
    row.topology = config.topology.tag;
    row.seed = seed;
    row.convergence_time = detect_convergence(trace.metrics);

    // Statistics over post-convergence samples; over the final tenth when the
    // run never converged.
    double from = row.convergence_time;
    if (from < 0.0 && !trace.metrics.empty()) {
        std::size_t window = std::max<std::size_t>(trace.metrics.size() / 10, 1);
        from = trace.metrics[trace.metrics.size() - window].time;
    }
    for (const auto& m : trace.metrics) {
        if (!m.valid || m.time < from)
            continue;
        row.max_global = std::max(row.max_global, m.max_global);
        row.max_avg_global = std::max(row.max_avg_global, m.avg_global);
        row.max_local = std::max(row.max_local, m.max_local);
        row.max_avg_local = std::max(row.max_avg_local, m.avg_local);
    }
    return row;
}

std::string metrics_csv(const TraceLog& trace) {
    std::string out = "time_s,mgs_us,ags_us,mls_us,als_us\n";
    for (const auto& m : trace.metrics)
        append_fmt(out, "%.3f,%.3f,%.3f,%.3f,%.3f\n", m.time, micro(m.max_global),
                   micro(m.avg_global), micro(m.max_local), micro(m.avg_local));
    return out;
}

std::string nodes_csv(const TraceLog& trace) {
    std::string out = "time_s,node_id,t_hat_s,delta_hat,alpha,last_error_us\n";
    for (const auto& n : trace.nodes)
        append_fmt(out, "%.3f,%d,%.9f,%.15e,%.6e,%.3f\n", n.time, n.node_id,
                   n.time_estimate, n.rate_multiplier, n.integral_gain,
                   micro(n.last_error));
    return out;
}

std::string summary_csv(std::span<const SummaryRow> rows) {
    std::string out = "protocol,topology,seed,max_global_us,max_avg_global_us,"
                      "max_local_us,max_avg_local_us,convergence_s\n";
    for (const auto& r : rows) {
        out += r.protocol;
        out += ',';
        out += r.topology;
        append_fmt(out, ",%llu,%.3f,%.3f,%.3f,%.3f,%.3f\n",
                   static_cast<unsigned long long>(r.seed), micro(r.max_global),
                   micro(r.max_avg_global), micro(r.max_local), micro(r.max_avg_local),
                   r.convergence_time);
    }
    return out;
}

namespace {

struct Cell {
    SummaryRow row;
    std::string metrics;
    std::string nodes;
};

Cell run_cell(SimConfig sim, std::uint64_t seed) {
    sim.seed = seed;
    TraceLog trace = run_simulation(sim);
    return Cell{summarize(trace, sim, seed), metrics_csv(trace), nodes_csv(trace)};
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    out << body;
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& outdir, int jobs) {
    std::filesystem::create_directories(outdir);
    const auto& seeds = config.seeds;

    std::vector<Cell> cells(seeds.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i)
            cells[i] = run_cell(config.base, seeds[i]);
    } else {
        // Cells are independent; assembly below is keyed by position, so the
        // completion order does not matter.
        std::vector<std::future<Cell>> futures;
        futures.reserve(seeds.size());
        for (std::size_t i = 0; i < seeds.size(); ++i)
            futures.push_back(
                std::async(std::launch::async, run_cell, config.base, seeds[i]));
        for (std::size_t i = 0; i < seeds.size(); ++i)
            cells[i] = futures[i].get();
    }

    ExperimentResult result;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        auto metrics_path = outdir / ("metrics_" + std::to_string(seeds[i]) + ".csv");
        auto nodes_path = outdir / ("nodes_" + std::to_string(seeds[i]) + ".csv");
        write_file(metrics_path, cells[i].metrics);
        write_file(nodes_path, cells[i].nodes);
        result.files.push_back(metrics_path);
        result.files.push_back(nodes_path);
        result.rows.push_back(cells[i].row);
    }
    auto summary_path = outdir / "summary.csv";
    write_file(summary_path, summary_csv(result.rows));
    result.files.push_back(summary_path);
    return result;
}

std::vector<EigRow> eigenvalue_sweep(double beta, double beacon_period, double freq,
                                     std::span<const double> alphas) {
    std::vector<EigRow> rows;
    rows.reserve(alphas.size());
    auto region = analysis::stability_region(beta, beacon_period, freq);
    for (double a : alphas) {
        auto eig = analysis::eigenvalues(
            analysis::ErrorDynamics{beta, a, beacon_period, freq});
        EigRow row;
        row.alpha = a;
        row.z1 = eig.z1;
        row.z2 = eig.z2;
        row.spectral_radius = eig.spectral_radius();
        row.stable = region.contains(a);
        if (row.spectral_radius == 0.0)
            row.iterations_to_90 = 1; // deadbeat settles immediately
        else if (row.spectral_radius < 1.0)
            row.iterations_to_90 = static_cast<int>(
                std::ceil(std::log(0.1) / std::log(row.spectral_radius)));
        else
            row.iterations_to_90 = -1;
        rows.push_back(row);
    }
    return rows;
}

std::vector<VarianceRow> variance_sweep(double beacon_period, double freq,
                                        const analysis::NoiseSpec& noise,
                                        std::span<const double> alphas) {
    std::vector<VarianceRow> rows;
    rows.reserve(alphas.size());
    for (double a : alphas) {
        VarianceRow row{a, true, 0.0};
        try {
            row.variance = analysis::steady_state_variance(a, beacon_period, freq, noise);
        } catch (const std::domain_error&) {
            row.bounded = false;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string eig_csv(std::span<const EigRow> rows) {
    std::string out =
        "alpha,z1_re,z1_im,z2_re,z2_im,spectral_radius,iterations_to_90,stable\n";
    for (const auto& r : rows)
        append_fmt(out, "%.9e,%.9f,%.9f,%.9f,%.9f,%.9f,%d,%d\n", r.alpha,
                   r.z1.real() + 0.0, r.z1.imag() + 0.0, r.z2.real() + 0.0,
                   r.z2.imag() + 0.0, r.spectral_radius, r.iterations_to_90,
                   r.stable ? 1 : 0);
    return out;
}

std::string variance_csv(std::span<const VarianceRow> rows) {
    std::string out = "alpha,bounded,variance_s2\n";
    for (const auto& r : rows) {
        if (r.bounded)
            append_fmt(out, "%.9e,1,%.9e\n", r.alpha, r.variance);
        else
            append_fmt(out, "%.9e,0,\n", r.alpha);
    }
    return out;
}

std::string sweep_csv(std::span<const EigRow> eig, std::span<const VarianceRow> var) {
    std::string out = "alpha,spectral_radius,iterations_to_90,bounded,variance_s2\n";
    for (std::size_t i = 0; i < eig.size() && i < var.size(); ++i) {
        if (var[i].bounded)
            append_fmt(out, "%.9e,%.9f,%d,1,%.9e\n", eig[i].alpha,
                       eig[i].spectral_radius, eig[i].iterations_to_90,
                       var[i].variance);
        else
            append_fmt(out, "%.9e,%.9f,%d,0,\n", eig[i].alpha, eig[i].spectral_radius,
                       eig[i].iterations_to_90);
    }
    return out;
}

std::string recompute_metrics_csv(std::istream& node_trace, const Topology& topology) {
    std::string line;
    if (!std::getline(node_trace, line))
        throw ConfigError("empty node trace");
    if (line.rfind("time_s,node_id,t_hat_s", 0) != 0)
        throw ConfigError("not a node-trace CSV (unexpected header)");

    // Snapshots keyed by sample time, in file order.
    std::vector<std::pair<double, std::vector<std::pair<int, double>>>> snapshots;
    int lineno = 1;
    while (std::getline(node_trace, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (fields.size() < 3)
            throw ConfigError("node trace line " + std::to_string(lineno) +
                              ": expected at least 3 fields");
        double time = std::stod(fields[0]);
        int id = std::stoi(fields[1]);
        double estimate = std::stod(fields[2]);
        if (snapshots.empty() || snapshots.back().first != time)
            snapshots.emplace_back(time, std::vector<std::pair<int, double>>{});
        snapshots.back().second.emplace_back(id, estimate);
    }

    TraceLog synth;
    for (const auto& [time, values] : snapshots)
        synth.metrics.push_back(compute_metrics(time, values, topology));
    return metrics_csv(synth);
}

} // namespace pisync
