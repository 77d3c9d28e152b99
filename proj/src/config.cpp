#include "pisync/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "pisync/controller.hpp"

namespace pisync {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return "";
    auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line;
};

struct Parser {
    std::string filename;
    std::vector<Entry> entries;

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(filename + ":" + std::to_string(line) + ": " + msg);
    }

    double number(const Entry& e) const {
        try {
            std::size_t pos = 0;
            double v = std::stod(e.value, &pos);
            if (pos != e.value.size())
                fail(e.line, "[" + e.section + "] " + e.key + ": trailing characters in '" +
                                 e.value + "'");
            return v;
        } catch (const std::exception&) {
            fail(e.line, "[" + e.section + "] " + e.key + ": expected a number, got '" +
                             e.value + "'");
        }
    }

    long integer(const Entry& e) const {
        double v = number(e);
        auto i = static_cast<long>(v);
        if (static_cast<double>(i) != v)
            fail(e.line, "[" + e.section + "] " + e.key + ": expected an integer, got '" +
                             e.value + "'");
        return i;
    }
};

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(trim(item));
    return out;
}

ProtocolKind parse_protocol_kind(const Parser& p, const Entry& e) {
    const std::string& v = e.value;
    if (v == "avg-pisync")
        return ProtocolKind::AvgPi;
    if (v == "flood-pisync")
        return ProtocolKind::FloodPi;
    if (v == "pulse-pisync")
        return ProtocolKind::PulsePi;
    if (v == "ls-flood")
        return ProtocolKind::LsFlood;
    if (v == "ls-pulse")
        return ProtocolKind::LsPulse;
    p.fail(e.line, "unknown protocol '" + v +
                       "' (avg-pisync, flood-pisync, pulse-pisync, ls-flood, ls-pulse)");
}

} // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    auto range = text.find("..");
    if (range != std::string::npos) {
        std::uint64_t lo = std::stoull(trim(text.substr(0, range)));
        std::uint64_t hi = std::stoull(trim(text.substr(range + 2)));
        if (hi < lo)
            throw ConfigError("seed range is empty: " + text);
        for (std::uint64_t s = lo; s <= hi; ++s)
            seeds.push_back(s);
        return seeds;
    }
    for (const auto& item : split(text, ','))
        if (!item.empty())
            seeds.push_back(std::stoull(item));
    if (seeds.empty())
        throw ConfigError("no seeds in '" + text + "'");
    return seeds;
}

ExperimentConfig parse_config(std::istream& in, const std::string& filename) {
    Parser p;
    p.filename = filename;

    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto comment = line.find('#');
        if (comment != std::string::npos)
            line = line.substr(0, comment);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                p.fail(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            p.fail(lineno, "expected 'key = value'");
        if (section.empty())
            p.fail(lineno, "entry before any [section] header");
        p.entries.push_back(
            Entry{section, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), lineno});
    }

    ExperimentConfig cfg;
    SimConfig& sim = cfg.base;

    // Topology first: other sections validate node ids against it.
    std::string topo_kind;
    int topo_nodes = 0, topo_rows = 0, topo_cols = 0;
    std::vector<std::pair<int, int>> topo_edges;
    bool alpha_auto = true, emax_auto = true;
    double drift_ppm = 0.0;
    bool have_drift_ppm = false;
    std::vector<double> drifts_ppm;

    for (const Entry& e : p.entries) {
        if (e.section == "topology") {
            if (e.key == "kind")
                topo_kind = e.value;
            else if (e.key == "nodes")
                topo_nodes = static_cast<int>(p.integer(e));
            else if (e.key == "rows")
                topo_rows = static_cast<int>(p.integer(e));
            else if (e.key == "cols")
                topo_cols = static_cast<int>(p.integer(e));
            else if (e.key == "edge") {
                auto parts = split(e.value, '-');
                if (parts.size() != 2)
                    p.fail(e.line, "edge must look like 'i-j'");
                topo_edges.emplace_back(std::stoi(parts[0]), std::stoi(parts[1]));
            } else
                p.fail(e.line, "unknown key '" + e.key + "' in [topology]");
        } else if (e.section == "protocol") {
            if (e.key == "kind")
                sim.protocol.kind = parse_protocol_kind(p, e);
            else if (e.key == "beacon_period")
                sim.protocol.beacon_period = p.number(e);
            else if (e.key == "reference")
                sim.reference = static_cast<int>(p.integer(e));
            else if (e.key == "beta")
                sim.protocol.proportional_gain = p.number(e);
            else if (e.key == "gain_mode") {
                if (e.value == "adaptive")
                    sim.protocol.gain_mode = GainMode::Adaptive;
                else if (e.value == "fixed")
                    sim.protocol.gain_mode = GainMode::Fixed;
                else
                    p.fail(e.line, "gain_mode must be 'adaptive' or 'fixed'");
            } else if (e.key == "alpha")
                sim.protocol.fixed_integral_gain = p.number(e);
            else if (e.key == "gate_fixed_gain")
                sim.protocol.gate_fixed_gain = p.integer(e) != 0;
            else if (e.key == "alpha_max") {
                if (e.value != "auto") {
                    sim.protocol.integral_gain_max = p.number(e);
                    alpha_auto = false;
                }
            } else if (e.key == "e_max") {
                if (e.value != "auto") {
                    sim.protocol.error_band = p.number(e);
                    emax_auto = false;
                }
            } else if (e.key == "ls_table")
                sim.protocol.ls_table_capacity = static_cast<int>(p.integer(e));
            else if (e.key == "processing_delay")
                sim.protocol.processing_delay = p.number(e);
            else if (e.key == "delay_compensation")
                sim.protocol.delay_compensation = p.integer(e) != 0;
            else
                p.fail(e.line, "unknown key '" + e.key + "' in [protocol]");
        } else if (e.section == "clock") {
            if (e.key == "nominal_freq")
                sim.clocks.nominal_freq = p.number(e);
            else if (e.key == "drift_ppm") {
                drift_ppm = p.number(e);
                have_drift_ppm = true;
            } else if (e.key == "drifts_ppm") {
                for (const auto& item : split(e.value, ','))
                    drifts_ppm.push_back(std::stod(item));
            } else if (e.key == "jitter") {
                if (e.value == "none")
                    sim.clocks.jitter.kind = JitterSpec::Kind::None;
                else if (e.value == "uniform")
                    sim.clocks.jitter.kind = JitterSpec::Kind::Uniform;
                else if (e.value == "gaussian")
                    sim.clocks.jitter.kind = JitterSpec::Kind::Gaussian;
                else
                    p.fail(e.line, "jitter must be none, uniform or gaussian");
            } else if (e.key == "jitter_param")
                sim.clocks.jitter.param = p.number(e);
            else
                p.fail(e.line, "unknown key '" + e.key + "' in [clock]");
        } else if (e.section == "channel") {
            if (e.key == "mean_delay")
                sim.channel.mean_delay = p.number(e);
            else if (e.key == "delay_jitter") {
                if (e.value == "none")
                    sim.channel.delay_jitter.kind = DelayJitter::Kind::None;
                else if (e.value == "uniform")
                    sim.channel.delay_jitter.kind = DelayJitter::Kind::Uniform;
                else if (e.value == "gaussian")
                    sim.channel.delay_jitter.kind = DelayJitter::Kind::Gaussian;
                else
                    p.fail(e.line, "delay_jitter must be none, uniform or gaussian");
            } else if (e.key == "delay_param")
                sim.channel.delay_jitter.param = p.number(e);
            else if (e.key == "loss")
                sim.channel.loss_probability = p.number(e);
            else if (e.key == "timestamp_noise_std")
                sim.channel.timestamp_noise_std = p.number(e);
            else
                p.fail(e.line, "unknown key '" + e.key + "' in [channel]");
        } else if (e.section == "lifecycle") {
            if (e.key != "event")
                p.fail(e.line, "unknown key '" + e.key + "' in [lifecycle]");
            std::stringstream ss(e.value);
            std::string kind;
            ss >> kind;
            LifecycleEvent lc{};
            if (kind == "off")
                lc.kind = LifecycleEvent::Kind::PowerOff;
            else if (kind == "on")
                lc.kind = LifecycleEvent::Kind::PowerOn;
            else if (kind == "freqstep")
                lc.kind = LifecycleEvent::Kind::FreqStep;
            else
                p.fail(e.line, "lifecycle event must be off, on or freqstep");
            if (!(ss >> lc.node >> lc.time))
                p.fail(e.line, "expected 'event = <kind> <node> <time> [freq]'");
            if (lc.kind == LifecycleEvent::Kind::FreqStep && !(ss >> lc.new_freq))
                p.fail(e.line, "freqstep needs a frequency value");
            sim.lifecycle.push_back(lc);
        } else if (e.section == "run") {
            if (e.key == "duration")
                sim.schedule.duration = p.number(e);
            else if (e.key == "sample_interval")
                sim.schedule.sample_interval = p.number(e);
            else if (e.key == "seeds") {
                try {
                    cfg.seeds = parse_seed_list(e.value);
                } catch (const std::exception& ex) {
                    p.fail(e.line, ex.what());
                }
            } else if (e.key == "start_stagger")
                sim.schedule.start_stagger = p.number(e);
            else if (e.key == "initial_offset") {
                sim.schedule.initial_offsets.clear();
                for (const auto& item : split(e.value, ','))
                    sim.schedule.initial_offsets.push_back(std::stod(item));
            } else if (e.key == "warmup_periods")
                sim.schedule.warmup_periods = p.number(e);
            else if (e.key == "name")
                cfg.name = e.value;
            else
                p.fail(e.line, "unknown key '" + e.key + "' in [run]");
        } else {
            p.fail(e.line, "unknown section [" + e.section + "]");
        }
    }

    if (topo_kind == "line")
        sim.topology = Topology::line(topo_nodes);
    else if (topo_kind == "grid")
        sim.topology = Topology::grid(topo_rows, topo_cols);
    else if (topo_kind == "complete")
        sim.topology = Topology::complete(topo_nodes);
    else if (topo_kind == "custom")
        sim.topology = Topology::custom(topo_nodes, topo_edges);
    else
        throw ConfigError(filename + ": [topology] kind must be line, grid, complete or custom");

    if (have_drift_ppm)
        sim.clocks.drift_bound = drift_ppm * 1e-6 * sim.clocks.nominal_freq;
    if (!drifts_ppm.empty()) {
        sim.clocks.explicit_true_freqs.clear();
        for (double ppm : drifts_ppm)
            sim.clocks.explicit_true_freqs.push_back(sim.clocks.nominal_freq *
                                                     (1.0 + ppm * 1e-6));
    }

    // Design-rule defaults for the adaptive gains unless pinned explicitly.
    if (alpha_auto || emax_auto) {
        PiDesign d = design_defaults(PiParams{sim.protocol.beacon_period,
                                              sim.clocks.nominal_freq,
                                              sim.clocks.drift_bound});
        if (alpha_auto)
            sim.protocol.integral_gain_max = d.integral_gain_max;
        if (emax_auto)
            sim.protocol.error_band = d.error_band;
    }

    sim.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    return parse_config(in, path);
}

} // namespace pisync
