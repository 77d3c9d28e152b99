#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pisync/channel.hpp"
#include "pisync/clock.hpp"
#include "pisync/events.hpp"
#include "pisync/metrics.hpp"
#include "pisync/protocols.hpp"
#include "pisync/topology.hpp"

namespace pisync {

struct LifecycleEvent {
    enum class Kind { PowerOff, PowerOn, FreqStep };
    Kind kind;
    int node;
    double time;
    double new_freq = 0.0; // FreqStep only
};

// Rejects schedules referencing unknown nodes, out-of-range times, or a
// power-on without a preceding power-off.
void validate_lifecycle(const std::vector<LifecycleEvent>& schedule, int node_count,
                        double duration);

struct ClockConfig {
    double nominal_freq = 1e6;
    double drift_bound = 0.0; // max |true - nominal|, ticks/second
    // Explicit per-node true frequencies (size node_count) override the
    // uniform draw from [nominal - bound, nominal + bound].
    std::vector<double> explicit_true_freqs;
    JitterSpec jitter;
};

struct RunSchedule {
    double duration = 10000.0;
    double sample_interval = 10.0;
    double start_stagger = 0.0; // node start times drawn uniformly in [0, stagger]
    // Initial logical estimates; size 0 (all zero), 1 (same for all) or node_count.
    std::vector<double> initial_offsets;
    double warmup_periods = 3.0; // listen-only span after a lifecycle power-on
};

struct SimConfig {
    Topology topology;
    ChannelModel channel;
    ClockConfig clocks;
    ProtocolConfig protocol;
    std::vector<LifecycleEvent> lifecycle;
    RunSchedule schedule;
    int reference = 1; // ignored by AvgPiSync
    std::uint64_t seed = 1;

    void validate() const;
};

struct NodeSample {
    double time;
    int node_id;
    double time_estimate;
    double rate_multiplier;
    double integral_gain;
    double last_error;
};

// Fired at every applied correction; logical_ref is the reference node's
// estimate at the same instant (NaN when there is no live reference).
struct UpdateRecord {
    double time;
    int node;
    double measured_error;
    double logical_before;
    double logical_after;
    double logical_ref;
};

using UpdateHook = std::function<void(const UpdateRecord&)>;

struct TraceLog {
    std::vector<MetricsSample> metrics;
    std::vector<NodeSample> nodes;

    std::uint64_t messages_sent = 0; // one per (broadcast, out-edge)
    std::uint64_t delivered = 0;
    std::uint64_t dropped_channel = 0;
    std::uint64_t dropped_offline = 0;
    std::uint64_t in_flight_at_end = 0;
    std::uint64_t rate_clamps = 0;
    std::map<int, std::uint64_t> sent_by_node;
    bool disconnected_warning = false;
};

// Runs one deterministic simulation: every random draw flows from the seeded
// generator in event-processing order (per-node frequency, start time, then
// per-event draws in dequeue order).
TraceLog run_simulation(const SimConfig& config, const UpdateHook& hook = {});

} // namespace pisync
