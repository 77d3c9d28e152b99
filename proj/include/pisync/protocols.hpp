#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>

#include "pisync/analysis.hpp"
#include "pisync/clock.hpp"
#include "pisync/controller.hpp"

namespace pisync {

enum class ProtocolKind { AvgPi, FloodPi, PulsePi, LsFlood, LsPulse };

// Adaptive runs the integral-gain schedule; Fixed pins (proportional,
// integral) gains for analysis replication runs.
enum class GainMode { Adaptive, Fixed };

struct ProtocolConfig {
    ProtocolKind kind = ProtocolKind::FloodPi;
    double beacon_period = 30.0;

    double proportional_gain = 1.0;
    GainMode gain_mode = GainMode::Adaptive;
    double fixed_integral_gain = 0.0;
    bool gate_fixed_gain = false; // apply the error band in fixed mode too
    double integral_gain_max = 0.0;
    double error_band = 0.0;

    int ls_table_capacity = 8;
    double processing_delay = 0.003; // pulse per-hop forwarding delay, seconds
    bool delay_compensation = false;
    double mean_delay_estimate = 0.0;
};

// Everything a handler may see about an incoming message: payload fields and
// the receiver's own hardware reading. Sender identity is deliberately absent.
struct ReceiveContext {
    double value; // received time estimate, channel noise already applied
    std::optional<std::uint64_t> seq;
    std::int64_t ticks; // receiver hardware ticks at receipt
};

struct Broadcast {
    double value;
    std::optional<std::uint64_t> seq;
};

struct ReceiveOutcome {
    bool updated = false;
    bool rebroadcast = false; // pulse forwarding request
    double measured_error = 0.0;
};

struct BeaconOutcome {
    std::optional<Broadcast> broadcast;
    bool updated = false;
    double measured_error = 0.0;
};

// Logical clock plus gain state shared by the PI protocol variants.
class PiCore {
public:
    PiCore(const ProtocolConfig& cfg, double nominal_freq, double initial_estimate);

    double read(std::int64_t ticks) const { return clock_.read(ticks); }

    double measured_error(double received, std::int64_t ticks) const;

    // One correction; jump_to engages the exact unit-proportional-gain
    // assignment used by the flooding variants. The adaptive schedule sees
    // the error rounded to whole ticks unless quantize_schedule is cleared
    // (averaged errors are already sums of tick-quantized skews).
    void apply(double error, std::int64_t ticks, std::optional<double> jump_to,
               bool quantize_schedule = true);

    // Nearest whole-tick value of a measured skew.
    double quantize(double error) const;

    void reset();

    double rate() const { return clock_.rate(); }
    double integral_gain() const;
    std::uint64_t rate_clamp_count() const { return clock_.clamp_count(); }

private:
    LogicalClock clock_;
    GainMode mode_;
    PiGains gains_;
    double fixed_alpha_;
    bool gate_fixed_;
    bool compensate_;
    double mean_delay_;
    double nominal_freq_;
};

class SyncProtocol {
public:
    virtual ~SyncProtocol() = default;

    virtual ReceiveOutcome on_receive(const ReceiveContext& ctx) = 0;
    virtual BeaconOutcome on_beacon(std::int64_t ticks) = 0;
    // Payload for a deferred (pulse-forwarded) broadcast at `ticks`.
    virtual Broadcast current_broadcast(std::int64_t ticks) const = 0;
    virtual double read_time(std::int64_t ticks) const = 0;
    // Power-on reinitialization: estimate zero, nominal rate, gains cold.
    virtual void reset() = 0;

    virtual double rate_multiplier() const = 0;
    virtual double integral_gain() const { return 0.0; }
    virtual std::uint64_t rate_clamp_count() const { return 0; }

    double last_error() const { return last_error_; }
    bool is_reference() const { return reference_; }

protected:
    explicit SyncProtocol(bool reference) : reference_(reference) {}

    bool reference_;
    double last_error_ = 0.0;
};

// Fully distributed variant: accumulates skews to every heard neighbor and
// applies one averaged correction per beacon period.
class AvgPiSync final : public SyncProtocol {
public:
    AvgPiSync(const ProtocolConfig& cfg, double nominal_freq, double initial_estimate);

    ReceiveOutcome on_receive(const ReceiveContext& ctx) override;
    BeaconOutcome on_beacon(std::int64_t ticks) override;
    Broadcast current_broadcast(std::int64_t ticks) const override;
    double read_time(std::int64_t ticks) const override { return core_.read(ticks); }
    void reset() override;

    double rate_multiplier() const override { return core_.rate(); }
    double integral_gain() const override { return core_.integral_gain(); }
    std::uint64_t rate_clamp_count() const override { return core_.rate_clamp_count(); }

    double pending_sum() const { return sum_; }
    int pending_count() const { return num_; }

private:
    PiCore core_;
    double sum_ = 0.0;
    int num_ = 0;
};

// Flooding variant: a fixed reference starts a numbered round every beacon
// period; everyone else corrects on the first fresh-sequence message and
// relays at its own beacon. With `pulse`, relaying happens immediately on
// receipt instead and only the reference beacons.
class FloodPiSync final : public SyncProtocol {
public:
    FloodPiSync(const ProtocolConfig& cfg, double nominal_freq, bool reference,
                double initial_estimate, bool pulse);

    ReceiveOutcome on_receive(const ReceiveContext& ctx) override;
    BeaconOutcome on_beacon(std::int64_t ticks) override;
    Broadcast current_broadcast(std::int64_t ticks) const override;
    double read_time(std::int64_t ticks) const override { return core_.read(ticks); }
    void reset() override;

    double rate_multiplier() const override { return core_.rate(); }
    double integral_gain() const override { return core_.integral_gain(); }
    std::uint64_t rate_clamp_count() const override { return core_.rate_clamp_count(); }

    std::uint64_t sequence() const { return seq_; }

private:
    PiCore core_;
    std::uint64_t seq_ = 0;
    bool pulse_;
    bool unit_jump_;
};

// Least-squares flooding baseline: keeps a FIFO table of
// (local ticks, received reference time) pairs and reads time off the fitted
// line. Sequence gating and relaying mirror the PI flooding variants.
class LsSync final : public SyncProtocol {
public:
    LsSync(const ProtocolConfig& cfg, double nominal_freq, bool reference,
           double initial_estimate, bool pulse);

    ReceiveOutcome on_receive(const ReceiveContext& ctx) override;
    BeaconOutcome on_beacon(std::int64_t ticks) override;
    Broadcast current_broadcast(std::int64_t ticks) const override;
    double read_time(std::int64_t ticks) const override;
    void reset() override;

    double rate_multiplier() const override { return rate_; }

    std::uint64_t sequence() const { return seq_; }
    std::size_t table_size() const { return table_.size(); }
    std::int64_t oldest_entry_ticks() const { return table_.front().ticks; }

private:
    struct Entry {
        std::int64_t ticks;
        double value;
    };

    void refit();

    std::size_t capacity_;
    double nominal_freq_;
    std::deque<Entry> table_;
    double anchor_value_;
    double rate_;
    std::int64_t anchor_ticks_ = 0;
    std::uint64_t seq_ = 0;
    bool pulse_;
};

std::unique_ptr<SyncProtocol> make_protocol(const ProtocolConfig& cfg,
                                            double nominal_freq, bool is_reference,
                                            double initial_estimate);

bool protocol_uses_sequence(ProtocolKind kind);
bool protocol_uses_reference(ProtocolKind kind);
const char* protocol_name(ProtocolKind kind);

} // namespace pisync
