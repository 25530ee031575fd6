#pragma once

#include <cstdint>
#include <queue>
#include <vector>

namespace etaxi {

enum class EventKind : std::uint8_t {
    PassengerArrival,
    TaxiArrivedAtNode,  // subject = taxi, token = movement generation
    ChargeComplete,     // subject = taxi, aux = station
    JamStateChanged,    // subject = segment, aux = 1 if jammed
    DispatchTick,
    CommandApplied,     // subject = command index
    NegotiationTimeout, // subject = prompt
    MetricsSample,
};

const char* to_string(EventKind k);

struct SimEvent {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::MetricsSample;
    int subject = -1;
    int aux = -1;
    std::uint64_t token = 0;
};

// Min-queue on (time, seq). The clock only moves forward through pop() or
// advance_to(); scheduling into the past is a SchedulingError.
class EventQueue {
public:
    const SimEvent& schedule(double time, EventKind kind, int subject = -1, int aux = -1, std::uint64_t token = 0);

    bool empty() const noexcept { return heap_.empty(); }
    std::size_t size() const noexcept { return heap_.size(); }
    const SimEvent& top() const { return heap_.top(); }
    SimEvent pop();

    double now() const noexcept { return now_; }
    void advance_to(double t);
    std::uint64_t scheduled_count() const noexcept { return next_seq_; }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const noexcept {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
    double now_ = 0.0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace etaxi
