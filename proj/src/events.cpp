#include "etaxi/events.hpp"

#include "etaxi/errors.hpp"

#include <string>

namespace etaxi {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::PassengerArrival: return "PassengerArrival";
        case EventKind::TaxiArrivedAtNode: return "TaxiArrivedAtNode";
        case EventKind::ChargeComplete: return "ChargeComplete";
        case EventKind::JamStateChanged: return "JamStateChanged";
        case EventKind::DispatchTick: return "DispatchTick";
        case EventKind::CommandApplied: return "CommandApplied";
        case EventKind::NegotiationTimeout: return "NegotiationTimeout";
        case EventKind::MetricsSample: return "MetricsSample";
    }
    return "Unknown";
}

const SimEvent& EventQueue::schedule(double time, EventKind kind, int subject, int aux, std::uint64_t token) {
    if (!(time >= now_)) {
        throw SchedulingError(std::string("event ") + to_string(kind) + " scheduled at " + std::to_string(time) +
                              " before clock " + std::to_string(now_));
    }
    heap_.push(SimEvent{time, next_seq_++, kind, subject, aux, token});
    return heap_.top();
}

SimEvent EventQueue::pop() {
    SimEvent ev = heap_.top();
    heap_.pop();
    now_ = ev.time;
    return ev;
}

void EventQueue::advance_to(double t) {
    if (t < now_) throw SchedulingError("clock cannot move backwards");
    now_ = t;
}

}  // namespace etaxi
