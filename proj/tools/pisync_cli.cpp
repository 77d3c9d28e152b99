// Command-line front end: run experiments from config files, emit closed-form
// analysis tables, and recompute metrics from node traces.

#include <fstream>
#include <iostream>
#include <vector>

#include "CLI11.hpp"

#include "pisync/experiment.hpp"

namespace {

std::vector<double> alpha_grid(double lo, double hi, int steps) {
    std::vector<double> alphas;
    if (steps < 2) {
        alphas.push_back(lo);
        return alphas;
    }
    for (int i = 0; i < steps; ++i)
        alphas.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(steps - 1));
    return alphas;
}

void emit(const std::string& body, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw pisync::ConfigError("cannot write " + out_path);
    out << body;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PISync network time synchronization simulator"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run an experiment config over its seeds");
    std::string run_config, run_out = "out", run_seeds;
    int run_jobs = 1;
    run->add_option("config", run_config, "experiment config file")->required();
    run->add_option("--out", run_out, "output directory");
    run->add_option("--seeds", run_seeds, "override seeds, e.g. 1..5 or 1,2,7");
    run->add_option("--jobs", run_jobs, "parallel seed cells");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "closed-form sweep tables");
    analyze->require_subcommand(1);
    double an_beta = 1.0, an_period = 30.0, an_freq = 1e6;
    double an_alpha_min = 0.0, an_alpha_max = 0.0;
    int an_steps = 50;
    double an_eta_t = 1.0, an_eta_w = 0.0;
    std::string an_out;
    for (auto* sub : {analyze->add_subcommand("eig", "eigenvalues and convergence"),
                      analyze->add_subcommand("variance", "steady-state variance"),
                      analyze->add_subcommand("sweep", "combined table")}) {
        sub->add_option("--beta", an_beta, "proportional gain");
        sub->add_option("--beacon", an_period, "beacon period, seconds");
        sub->add_option("--freq", an_freq, "nominal frequency, ticks/second");
        sub->add_option("--alpha-min", an_alpha_min, "sweep start");
        sub->add_option("--alpha-max", an_alpha_max, "sweep end (default: stability bound)");
        sub->add_option("--steps", an_steps, "sweep points");
        sub->add_option("--eta-t", an_eta_t, "timestamp noise, dimensionless");
        sub->add_option("--eta-w", an_eta_w, "frequency jitter, dimensionless");
        sub->add_option("--out", an_out, "output file (default: stdout)");
    }

    // metrics
    auto* metrics = app.add_subcommand("metrics", "recompute metrics from a node trace");
    std::string metrics_trace, metrics_config, metrics_out;
    metrics->add_option("trace", metrics_trace, "node-trace CSV")->required();
    metrics->add_option("--config", metrics_config, "config providing the topology")
        ->required();
    metrics->add_option("--out", metrics_out, "output file (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            pisync::ExperimentConfig cfg = pisync::load_config(run_config);
            if (!run_seeds.empty())
                cfg.seeds = pisync::parse_seed_list(run_seeds);
            auto result = pisync::run_experiment(cfg, run_out, run_jobs);
            for (const auto& row : result.rows)
                std::cerr << row.protocol << " " << row.topology << " seed " << row.seed
                          << ": max global " << row.max_global * 1e6
                          << " us, convergence " << row.convergence_time << " s\n";
            std::cerr << "wrote " << result.files.size() << " files under " << run_out
                      << "\n";
        } else if (*analyze) {
            if (an_alpha_max <= 0.0) {
                auto region =
                    pisync::analysis::stability_region(an_beta, an_period, an_freq);
                if (region.empty())
                    throw pisync::ConfigError("no stable region for this beta");
                an_alpha_max = region.hi;
            }
            auto alphas = alpha_grid(an_alpha_min, an_alpha_max, an_steps);
            auto noise = pisync::analysis::NoiseSpec::from_eta(an_eta_t, an_eta_w, an_freq);
            if (analyze->get_subcommands().front()->get_name() == "eig")
                emit(pisync::eig_csv(
                         pisync::eigenvalue_sweep(an_beta, an_period, an_freq, alphas)),
                     an_out);
            else if (analyze->get_subcommands().front()->get_name() == "variance")
                emit(pisync::variance_csv(
                         pisync::variance_sweep(an_period, an_freq, noise, alphas)),
                     an_out);
            else
                emit(pisync::sweep_csv(
                         pisync::eigenvalue_sweep(an_beta, an_period, an_freq, alphas),
                         pisync::variance_sweep(an_period, an_freq, noise, alphas)),
                     an_out);
        } else if (*metrics) {
            pisync::ExperimentConfig cfg = pisync::load_config(metrics_config);
            std::ifstream trace(metrics_trace);
            if (!trace)
                throw pisync::ConfigError("cannot open trace: " + metrics_trace);
            emit(pisync::recompute_metrics_csv(trace, cfg.base.topology), metrics_out);
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
