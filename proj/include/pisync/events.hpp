#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

namespace pisync {

enum class EventKind {
    Start,    // initial power-up at the node's staggered start time
    Beacon,   // hardware counter crossed a beacon-period multiple
    Send,     // deferred broadcast (pulse forwarding)
    Deliver,  // message arrival at one receiver
    PowerOff, // lifecycle
    PowerOn,  // lifecycle
    FreqStep, // lifecycle: true frequency change
    Sample,   // periodic metrics snapshot
};

struct SimEvent {
    double time = 0.0;
    std::uint64_t tiebreak = 0;
    EventKind kind = EventKind::Sample;
    int node = -1;

    // Deliver payload
    double value = 0.0;
    std::optional<std::uint64_t> seq;
    int sender = -1;
    double send_time = 0.0;

    // Beacon bookkeeping
    std::uint64_t gen = 0;
    std::int64_t ticks = 0;

    // FreqStep payload
    double new_freq = 0.0;
};

// Min-queue over (time, tiebreak). The tiebreak is assigned at push time and
// unique, so the dequeue order is a total order independent of the heap's
// internal layout.
class EventQueue {
public:
    void push(SimEvent ev) {
        ev.tiebreak = next_tiebreak_++;
        heap_.push(std::move(ev));
    }

    // For order-stability tests: caller supplies the tiebreak.
    void push_ordered(SimEvent ev) {
        next_tiebreak_ = std::max(next_tiebreak_, ev.tiebreak + 1);
        heap_.push(std::move(ev));
    }

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }

    SimEvent pop() {
        SimEvent ev = heap_.top();
        heap_.pop();
        return ev;
    }

    const SimEvent& peek() const { return heap_.top(); }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            if (a.time != b.time)
                return a.time > b.time;
            return a.tiebreak > b.tiebreak;
        }
    };

    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
    std::uint64_t next_tiebreak_ = 0;
};

} // namespace pisync
