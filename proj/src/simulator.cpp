#include "pisync/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pisync {

void validate_lifecycle(const std::vector<LifecycleEvent>& schedule, int node_count,
                        double duration) {
    std::vector<bool> off(static_cast<std::size_t>(node_count) + 1, false);
    std::vector<LifecycleEvent> sorted = schedule;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const LifecycleEvent& a, const LifecycleEvent& b) {
                         return a.time < b.time;
                     });
    for (const auto& ev : sorted) {
        if (ev.node < 1 || ev.node > node_count)
            throw ContractViolation("lifecycle event for unknown node " +
                                    std::to_string(ev.node));
        if (ev.time < 0.0 || ev.time > duration)
            throw ContractViolation("lifecycle event outside the run duration");
        switch (ev.kind) {
        case LifecycleEvent::Kind::PowerOff:
            if (off[static_cast<std::size_t>(ev.node)])
                throw ContractViolation("node " + std::to_string(ev.node) +
                                        " powered off twice");
            off[static_cast<std::size_t>(ev.node)] = true;
            break;
        case LifecycleEvent::Kind::PowerOn:
            if (!off[static_cast<std::size_t>(ev.node)])
                throw ContractViolation("power-on for node " + std::to_string(ev.node) +
                                        " that was never powered off");
            off[static_cast<std::size_t>(ev.node)] = false;
            break;
        case LifecycleEvent::Kind::FreqStep:
            if (ev.new_freq <= 0.0)
                throw ContractViolation("frequency step must be positive");
            break;
        }
    }
}

void SimConfig::validate() const {
    topology.validate();
    if (topology.node_count < 1)
        throw ConfigError("empty topology");
    channel.validate();
    if (schedule.duration < 0.0)
        throw ConfigError("duration must be nonnegative");
    if (schedule.sample_interval <= 0.0)
        throw ConfigError("sample interval must be positive");
    if (clocks.nominal_freq <= 0.0)
        throw ConfigError("nominal frequency must be positive");
    if (clocks.drift_bound < 0.0 || clocks.drift_bound >= clocks.nominal_freq)
        throw ConfigError("drift bound must lie in [0, nominal frequency)");
    if (!clocks.explicit_true_freqs.empty() &&
        clocks.explicit_true_freqs.size() != static_cast<std::size_t>(topology.node_count))
        throw ConfigError("explicit frequency list must cover every node");
    std::size_t n_off = schedule.initial_offsets.size();
    if (n_off > 1 && n_off != static_cast<std::size_t>(topology.node_count))
        throw ConfigError("initial offset list must cover every node");
    if (protocol_uses_reference(protocol.kind) &&
        (reference < 1 || reference > topology.node_count))
        throw ConfigError("reference node out of range");
    if (protocol.beacon_period <= 0.0)
        throw ConfigError("beacon period must be positive");
    if (protocol.processing_delay < 0.0)
        throw ConfigError("processing delay must be nonnegative");
    if (protocol.integral_gain_max < 0.0 || protocol.error_band < 0.0 ||
        protocol.fixed_integral_gain < 0.0)
        throw ConfigError("gains and error band must be nonnegative");
    if (protocol.gain_mode == GainMode::Adaptive) {
        // The adaptive schedule relies on offset corrections being convex
        // combinations, which also keeps the network-wide spread contractive.
        if (protocol.proportional_gain <= 0.0 || protocol.proportional_gain > 1.0)
            throw ConfigError("proportional gain must lie in (0, 1]");
    } else if (protocol.proportional_gain <= 0.0 || protocol.proportional_gain >= 2.0) {
        throw ConfigError("proportional gain must lie in (0, 2)");
    }
    validate_lifecycle(lifecycle, topology.node_count, schedule.duration);
}

namespace {

class Simulator {
public:
    Simulator(const SimConfig& cfg, const UpdateHook& hook)
        : cfg_(cfg), hook_(hook), rng_(cfg.seed) {}

    TraceLog run();

private:
    struct NodeRuntime {
        int id = 0;
        bool started = false;
        bool powered = false;
        bool lifecycle_off = false;
        double start_time = 0.0;
        double warmup_until = 0.0;
        std::uint64_t beacon_gen = 0;
        std::int64_t next_beacon_ticks = 0;
        bool send_pending = false;
        std::unique_ptr<HardwareClock> hw;
        std::unique_ptr<SyncProtocol> proto;
    };

    NodeRuntime& node(int id) { return nodes_[static_cast<std::size_t>(id - 1)]; }

    void init_nodes();
    void schedule_beacon(NodeRuntime& n, double now);
    void broadcast(NodeRuntime& n, double now, const Broadcast& b);
    void record_update(double now, int node_id, double measured, double before,
                       double after);
    double reference_estimate(double now);

    void handle_start(const SimEvent& ev);
    void handle_beacon(const SimEvent& ev);
    void handle_send(const SimEvent& ev);
    void handle_deliver(const SimEvent& ev);
    void handle_power_off(const SimEvent& ev);
    void handle_power_on(const SimEvent& ev);
    void handle_freq_step(const SimEvent& ev);
    void handle_sample(const SimEvent& ev);

    const SimConfig& cfg_;
    const UpdateHook& hook_;
    Rng rng_;
    EventQueue queue_;
    std::vector<NodeRuntime> nodes_;
    std::vector<std::vector<int>> out_adj_;
    std::int64_t beacon_ticks_ = 0; // ticks per beacon period at nominal rate
    TraceLog trace_;
};

void Simulator::init_nodes() {
    const int n = cfg_.topology.node_count;
    out_adj_ = cfg_.topology.out_adjacency();
    beacon_ticks_ = static_cast<std::int64_t>(
        std::llround(cfg_.protocol.beacon_period * cfg_.clocks.nominal_freq));

    // Draw order: per-node true frequency, then per-node start time, both in
    // node-id order, before any event is processed.
    std::vector<double> freqs(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (!cfg_.clocks.explicit_true_freqs.empty())
            freqs[static_cast<std::size_t>(i)] = cfg_.clocks.explicit_true_freqs[static_cast<std::size_t>(i)];
        else if (cfg_.clocks.drift_bound > 0.0)
            freqs[static_cast<std::size_t>(i)] =
                rng_.uniform(cfg_.clocks.nominal_freq - cfg_.clocks.drift_bound,
                             cfg_.clocks.nominal_freq + cfg_.clocks.drift_bound);
        else
            freqs[static_cast<std::size_t>(i)] = cfg_.clocks.nominal_freq;
    }
    std::vector<double> starts(static_cast<std::size_t>(n), 0.0);
    if (cfg_.schedule.start_stagger > 0.0)
        for (int i = 0; i < n; ++i)
            starts[static_cast<std::size_t>(i)] = rng_.uniform(0.0, cfg_.schedule.start_stagger);

    nodes_.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        NodeRuntime& nr = nodes_[static_cast<std::size_t>(i)];
        nr.id = i + 1;
        nr.start_time = starts[static_cast<std::size_t>(i)];
        nr.hw = std::make_unique<HardwareClock>(cfg_.clocks.nominal_freq,
                                                freqs[static_cast<std::size_t>(i)],
                                                cfg_.clocks.jitter, nr.start_time);
        double offset = 0.0;
        if (cfg_.schedule.initial_offsets.size() == 1)
            offset = cfg_.schedule.initial_offsets.front();
        else if (!cfg_.schedule.initial_offsets.empty())
            offset = cfg_.schedule.initial_offsets[static_cast<std::size_t>(i)];
        bool is_ref = protocol_uses_reference(cfg_.protocol.kind) && nr.id == cfg_.reference;
        nr.proto = make_protocol(cfg_.protocol, cfg_.clocks.nominal_freq, is_ref, offset);

        SimEvent start;
        start.time = nr.start_time;
        start.kind = EventKind::Start;
        start.node = nr.id;
        queue_.push(start);
    }

    for (const auto& lc : cfg_.lifecycle) {
        SimEvent ev;
        ev.time = lc.time;
        ev.node = lc.node;
        ev.new_freq = lc.new_freq;
        switch (lc.kind) {
        case LifecycleEvent::Kind::PowerOff:
            ev.kind = EventKind::PowerOff;
            break;
        case LifecycleEvent::Kind::PowerOn:
            ev.kind = EventKind::PowerOn;
            break;
        case LifecycleEvent::Kind::FreqStep:
            ev.kind = EventKind::FreqStep;
            break;
        }
        queue_.push(ev);
    }

    SimEvent sample;
    sample.time = 0.0;
    sample.kind = EventKind::Sample;
    queue_.push(sample);
}

void Simulator::schedule_beacon(NodeRuntime& n, double now) {
    n.next_beacon_ticks += beacon_ticks_;
    SimEvent ev;
    ev.time = std::max(now, n.hw->time_at_ticks(static_cast<double>(n.next_beacon_ticks)));
    ev.kind = EventKind::Beacon;
    ev.node = n.id;
    ev.gen = n.beacon_gen;
    ev.ticks = n.next_beacon_ticks;
    queue_.push(ev);
}

void Simulator::broadcast(NodeRuntime& n, double now, const Broadcast& b) {
    for (int dst : out_adj_[static_cast<std::size_t>(n.id)]) {
        ++trace_.messages_sent;
        ++trace_.sent_by_node[n.id];
        if (cfg_.channel.loss_probability > 0.0 &&
            rng_.bernoulli(cfg_.channel.loss_probability)) {
            ++trace_.dropped_channel;
            continue;
        }
        double delay = cfg_.channel.randomized_delay() || cfg_.channel.mean_delay > 0.0
                           ? cfg_.channel.sample_delay(rng_)
                           : 0.0;
        SimEvent ev;
        ev.time = now + delay;
        ev.kind = EventKind::Deliver;
        ev.node = dst;
        ev.value = b.value;
        ev.seq = b.seq;
        ev.sender = n.id;
        ev.send_time = now;
        queue_.push(ev);
    }
}

double Simulator::reference_estimate(double now) {
    if (!protocol_uses_reference(cfg_.protocol.kind))
        return std::numeric_limits<double>::quiet_NaN();
    NodeRuntime& ref = node(cfg_.reference);
    if (!ref.started || !ref.powered)
        return std::numeric_limits<double>::quiet_NaN();
    return ref.proto->read_time(ref.hw->read(now));
}

void Simulator::record_update(double now, int node_id, double measured, double before,
                              double after) {
    if (hook_)
        hook_(UpdateRecord{now, node_id, measured, before, after,
                           reference_estimate(now)});
}

void Simulator::handle_start(const SimEvent& ev) {
    NodeRuntime& n = node(ev.node);
    if (n.lifecycle_off)
        return; // powered off before it ever came up; PowerOn will start it
    n.started = true;
    n.powered = true;
    n.hw->resample_jitter(ev.time, rng_);
    n.next_beacon_ticks = 0;
    schedule_beacon(n, ev.time);
}

void Simulator::handle_beacon(const SimEvent& ev) {
    NodeRuntime& n = node(ev.node);
    if (!n.powered || ev.gen != n.beacon_gen)
        return; // cancelled by a lifecycle or frequency change
    n.hw->mark_crossing(ev.time, ev.ticks);
    // New synchronization round for this node: fresh frequency jitter, held
    // constant until the next beacon.
    n.hw->resample_jitter(ev.time, rng_);
    double before = n.proto->read_time(ev.ticks);
    BeaconOutcome out = n.proto->on_beacon(ev.ticks);
    if (out.updated)
        record_update(ev.time, n.id, out.measured_error, before,
                      n.proto->read_time(ev.ticks));
    if (out.broadcast && ev.time >= n.warmup_until)
        broadcast(n, ev.time, *out.broadcast);
    schedule_beacon(n, ev.time);
}

void Simulator::handle_send(const SimEvent& ev) {
    NodeRuntime& n = node(ev.node);
    n.send_pending = false;
    if (!n.powered)
        return;
    if (ev.time < n.warmup_until)
        return;
    std::int64_t ticks = n.hw->read(ev.time);
    broadcast(n, ev.time, n.proto->current_broadcast(ticks));
}

void Simulator::handle_deliver(const SimEvent& ev) {
    NodeRuntime& n = node(ev.node);
    if (!n.started || !n.powered) {
        ++trace_.dropped_offline;
        return;
    }
    ++trace_.delivered;
    double value = ev.value;
    if (cfg_.channel.timestamp_noise_std > 0.0)
        value += rng_.normal(0.0, cfg_.channel.timestamp_noise_std);
    std::int64_t ticks = n.hw->read(ev.time);
    double before = n.proto->read_time(ticks);
    ReceiveOutcome out = n.proto->on_receive(ReceiveContext{value, ev.seq, ticks});
    if (out.updated)
        record_update(ev.time, n.id, out.measured_error, before,
                      n.proto->read_time(ticks));
    if (out.rebroadcast && !n.send_pending) {
        n.send_pending = true;
        SimEvent send;
        send.time = ev.time + cfg_.protocol.processing_delay;
        send.kind = EventKind::Send;
        send.node = n.id;
        queue_.push(send);
    }
}

void Simulator::handle_power_off(const SimEvent& ev) {
    NodeRuntime& n = node(ev.node);
    n.powered = false;
    n.lifecycle_off = true;
    ++n.beacon_gen;
}

void Simulator::handle_power_on(const SimEvent& ev) {
    NodeRuntime& n = node(ev.node);
    n.powered = true;
    n.started = true;
    n.lifecycle_off = false;
    n.hw->restart(ev.time);
    n.hw->resample_jitter(ev.time, rng_);
    n.proto->reset();
    n.warmup_until =
        ev.time + cfg_.schedule.warmup_periods * cfg_.protocol.beacon_period;
    ++n.beacon_gen;
    n.next_beacon_ticks = 0;
    schedule_beacon(n, ev.time);
}

void Simulator::handle_freq_step(const SimEvent& ev) {
    NodeRuntime& n = node(ev.node);
    if (!n.started) {
        // Not yet running: rebuild the oscillator at the new frequency.
        n.hw = std::make_unique<HardwareClock>(cfg_.clocks.nominal_freq, ev.new_freq,
                                               cfg_.clocks.jitter, n.start_time);
        return;
    }
    n.hw->set_true_freq(ev.time, ev.new_freq);
    if (n.powered) {
        // The pending beacon's wall time is stale under the new frequency.
        ++n.beacon_gen;
        n.next_beacon_ticks -= beacon_ticks_;
        schedule_beacon(n, ev.time);
    }
}

void Simulator::handle_sample(const SimEvent& ev) {
    std::vector<std::pair<int, double>> values;
    values.reserve(nodes_.size());
    for (NodeRuntime& n : nodes_) {
        if (!n.started || !n.powered)
            continue;
        std::int64_t ticks = n.hw->read(ev.time);
        double estimate = n.proto->read_time(ticks);
        values.emplace_back(n.id, estimate);
        trace_.nodes.push_back(NodeSample{ev.time, n.id, estimate,
                                          n.proto->rate_multiplier(),
                                          n.proto->integral_gain(),
                                          n.proto->last_error()});
    }
    trace_.metrics.push_back(compute_metrics(ev.time, values, cfg_.topology));
    double next = ev.time + cfg_.schedule.sample_interval;
    if (next <= cfg_.schedule.duration) {
        SimEvent s;
        s.time = next;
        s.kind = EventKind::Sample;
        queue_.push(s);
    }
}

TraceLog Simulator::run() {
    cfg_.validate();
    trace_.disconnected_warning = !cfg_.topology.weakly_connected();
    init_nodes();

    while (!queue_.empty()) {
        if (queue_.peek().time > cfg_.schedule.duration)
            break;
        SimEvent ev = queue_.pop();
        switch (ev.kind) {
        case EventKind::Start:
            handle_start(ev);
            break;
        case EventKind::Beacon:
            handle_beacon(ev);
            break;
        case EventKind::Send:
            handle_send(ev);
            break;
        case EventKind::Deliver:
            handle_deliver(ev);
            break;
        case EventKind::PowerOff:
            handle_power_off(ev);
            break;
        case EventKind::PowerOn:
            handle_power_on(ev);
            break;
        case EventKind::FreqStep:
            handle_freq_step(ev);
            break;
        case EventKind::Sample:
            handle_sample(ev);
            break;
        }
    }

    while (!queue_.empty()) {
        if (queue_.pop().kind == EventKind::Deliver)
            ++trace_.in_flight_at_end;
    }
    for (NodeRuntime& n : nodes_)
        trace_.rate_clamps += n.proto->rate_clamp_count();
    return trace_;
}

} // namespace

TraceLog run_simulation(const SimConfig& config, const UpdateHook& hook) {
    Simulator sim(config, hook);
    return sim.run();
}

} // namespace pisync
