#include "pisync/protocols.hpp"

#include <cmath>

namespace pisync {

PiCore::PiCore(const ProtocolConfig& cfg, double nominal_freq, double initial_estimate)
    : clock_(nominal_freq),
      mode_(cfg.gain_mode),
      fixed_alpha_(cfg.fixed_integral_gain),
      gate_fixed_(cfg.gate_fixed_gain),
      compensate_(cfg.delay_compensation),
      mean_delay_(cfg.mean_delay_estimate),
      nominal_freq_(nominal_freq) {
    gains_.proportional_gain = cfg.proportional_gain;
    gains_.integral_gain_max = cfg.integral_gain_max;
    gains_.error_band = cfg.error_band;
    clock_.reset(initial_estimate);
}

double PiCore::measured_error(double received, std::int64_t ticks) const {
    double local = clock_.read(ticks);
    if (compensate_)
        return delay_compensated_error(received, local, mean_delay_, clock_.rate(),
                                       nominal_freq_);
    return received - local;
}

double PiCore::quantize(double error) const {
    return std::round(error * nominal_freq_) / nominal_freq_;
}

void PiCore::apply(double error, std::int64_t ticks, std::optional<double> jump_to,
                   bool quantize_schedule) {
    double offset, rate_delta;
    if (mode_ == GainMode::Adaptive) {
        // The gain schedule sees errors in whole hardware ticks, as the
        // reference platform computes skews in timer ticks. This makes the
        // equal-error guard of the adaptation rule meaningful at the noise
        // floor; with continuous errors a near-zero increment would send the
        // gain ratio to its cap instead. Averaged errors arrive pre-quantized
        // per receipt and pass through as fractions.
        double quantized = quantize_schedule ? quantize(error) : error;
        PiStep step = pi_step(quantized, gains_);
        gains_ = step.next;
        offset = gains_.proportional_gain * error;
        rate_delta = step.rate_delta;
    } else {
        offset = gains_.proportional_gain * error;
        bool in_band = !gate_fixed_ || std::abs(error) <= gains_.error_band;
        rate_delta = in_band ? fixed_alpha_ * error : 0.0;
    }
    if (jump_to && gains_.proportional_gain == 1.0) {
        double target = *jump_to;
        if (compensate_)
            target += mean_delay_ * nominal_freq_ * clock_.rate();
        clock_.correct_to(ticks, target, rate_delta);
    } else {
        clock_.correct(ticks, offset, rate_delta);
    }
}

void PiCore::reset() {
    clock_.reset(0.0);
    gains_.integral_gain = 0.0;
    gains_.prev_error.reset();
    gains_.integrator_active = false;
}

double PiCore::integral_gain() const {
    return mode_ == GainMode::Adaptive ? gains_.integral_gain : fixed_alpha_;
}

// ---------------------------------------------------------------------------
// AvgPiSync

AvgPiSync::AvgPiSync(const ProtocolConfig& cfg, double nominal_freq,
                     double initial_estimate)
    : SyncProtocol(false), core_(cfg, nominal_freq, initial_estimate) {}

ReceiveOutcome AvgPiSync::on_receive(const ReceiveContext& ctx) {
    sum_ += core_.quantize(core_.measured_error(ctx.value, ctx.ticks));
    ++num_;
    return {}; // correction deferred to the beacon
}

BeaconOutcome AvgPiSync::on_beacon(std::int64_t ticks) {
    BeaconOutcome out;
    if (num_ > 0) {
        double e = sum_ / static_cast<double>(num_);
        core_.apply(e, ticks, std::nullopt, /*quantize_schedule=*/false);
        last_error_ = e;
        sum_ = 0.0;
        num_ = 0;
        out.updated = true;
        out.measured_error = e;
    }
    out.broadcast = Broadcast{core_.read(ticks), std::nullopt};
    return out;
}

Broadcast AvgPiSync::current_broadcast(std::int64_t ticks) const {
    return Broadcast{core_.read(ticks), std::nullopt};
}

void AvgPiSync::reset() {
    core_.reset();
    sum_ = 0.0;
    num_ = 0;
    last_error_ = 0.0;
}

// ---------------------------------------------------------------------------
// FloodPiSync / PulsePiSync

FloodPiSync::FloodPiSync(const ProtocolConfig& cfg, double nominal_freq, bool reference,
                         double initial_estimate, bool pulse)
    : SyncProtocol(reference),
      core_(cfg, nominal_freq, initial_estimate),
      pulse_(pulse),
      unit_jump_(cfg.proportional_gain == 1.0) {}

ReceiveOutcome FloodPiSync::on_receive(const ReceiveContext& ctx) {
    if (reference_)
        return {}; // the reference is the time source
    if (!ctx.seq || *ctx.seq <= seq_)
        return {}; // stale round, only the first fresh message counts
    double e = core_.measured_error(ctx.value, ctx.ticks);
    core_.apply(e, ctx.ticks, unit_jump_ ? std::optional<double>(ctx.value) : std::nullopt);
    seq_ = *ctx.seq;
    last_error_ = e;
    return ReceiveOutcome{true, pulse_, e};
}

BeaconOutcome FloodPiSync::on_beacon(std::int64_t ticks) {
    BeaconOutcome out;
    if (reference_)
        ++seq_;
    else if (pulse_)
        return out; // pulse nodes relay on receipt, not on a schedule
    out.broadcast = Broadcast{core_.read(ticks), seq_};
    return out;
}

Broadcast FloodPiSync::current_broadcast(std::int64_t ticks) const {
    return Broadcast{core_.read(ticks), seq_};
}

void FloodPiSync::reset() {
    core_.reset();
    seq_ = 0;
    last_error_ = 0.0;
}

// ---------------------------------------------------------------------------
// LsSync (FTSP/PulseSync-style least-squares baselines)

LsSync::LsSync(const ProtocolConfig& cfg, double nominal_freq, bool reference,
               double initial_estimate, bool pulse)
    : SyncProtocol(reference),
      capacity_(static_cast<std::size_t>(cfg.ls_table_capacity)),
      nominal_freq_(nominal_freq),
      anchor_value_(initial_estimate),
      rate_(1.0 / nominal_freq),
      pulse_(pulse) {
    if (cfg.ls_table_capacity < 2)
        throw ContractViolation("regression table capacity must be at least 2");
}

double LsSync::read_time(std::int64_t ticks) const {
    return anchor_value_ + rate_ * static_cast<double>(ticks - anchor_ticks_);
}

void LsSync::refit() {
    if (table_.size() == 1) {
        // Single sample: nominal slope through the point.
        anchor_ticks_ = table_.back().ticks;
        anchor_value_ = table_.back().value;
        rate_ = 1.0 / nominal_freq_;
        return;
    }
    std::vector<double> values;
    std::vector<std::int64_t> ticks;
    values.reserve(table_.size());
    ticks.reserve(table_.size());
    for (const Entry& e : table_) {
        ticks.push_back(e.ticks);
        values.push_back(e.value);
    }
    try {
        auto fit = analysis::least_squares_pairwise(values, ticks);
        anchor_ticks_ = table_.back().ticks;
        anchor_value_ = fit.offset + fit.rate * static_cast<double>(anchor_ticks_);
        rate_ = fit.rate;
    } catch (const std::domain_error&) {
        // Degenerate sample set: keep the previous fit.
    }
}

ReceiveOutcome LsSync::on_receive(const ReceiveContext& ctx) {
    if (reference_)
        return {};
    if (!ctx.seq || *ctx.seq <= seq_)
        return {};
    double e = ctx.value - read_time(ctx.ticks);
    table_.push_back(Entry{ctx.ticks, ctx.value});
    if (table_.size() > capacity_)
        table_.pop_front();
    refit();
    seq_ = *ctx.seq;
    last_error_ = e;
    return ReceiveOutcome{true, pulse_, e};
}

BeaconOutcome LsSync::on_beacon(std::int64_t ticks) {
    BeaconOutcome out;
    if (reference_)
        ++seq_;
    else if (pulse_)
        return out;
    out.broadcast = Broadcast{read_time(ticks), seq_};
    return out;
}

Broadcast LsSync::current_broadcast(std::int64_t ticks) const {
    return Broadcast{read_time(ticks), seq_};
}

void LsSync::reset() {
    table_.clear();
    anchor_value_ = 0.0;
    anchor_ticks_ = 0;
    rate_ = 1.0 / nominal_freq_;
    seq_ = 0;
    last_error_ = 0.0;
}

// ---------------------------------------------------------------------------

std::unique_ptr<SyncProtocol> make_protocol(const ProtocolConfig& cfg,
                                            double nominal_freq, bool is_reference,
                                            double initial_estimate) {
    switch (cfg.kind) {
    case ProtocolKind::AvgPi:
        return std::make_unique<AvgPiSync>(cfg, nominal_freq, initial_estimate);
    case ProtocolKind::FloodPi:
        return std::make_unique<FloodPiSync>(cfg, nominal_freq, is_reference,
                                             initial_estimate, false);
    case ProtocolKind::PulsePi:
        return std::make_unique<FloodPiSync>(cfg, nominal_freq, is_reference,
                                             initial_estimate, true);
    case ProtocolKind::LsFlood:
        return std::make_unique<LsSync>(cfg, nominal_freq, is_reference,
                                        initial_estimate, false);
    case ProtocolKind::LsPulse:
        return std::make_unique<LsSync>(cfg, nominal_freq, is_reference,
                                        initial_estimate, true);
    }
    throw ContractViolation("unknown protocol kind");
}

bool protocol_uses_sequence(ProtocolKind kind) { return kind != ProtocolKind::AvgPi; }

bool protocol_uses_reference(ProtocolKind kind) { return kind != ProtocolKind::AvgPi; }

const char* protocol_name(ProtocolKind kind) {
    switch (kind) {
    case ProtocolKind::AvgPi:
        return "avg-pisync";
    case ProtocolKind::FloodPi:
        return "flood-pisync";
    case ProtocolKind::PulsePi:
        return "pulse-pisync";
    case ProtocolKind::LsFlood:
        return "ls-flood";
    case ProtocolKind::LsPulse:
        return "ls-pulse";
    }
    return "unknown";
}

} // namespace pisync
