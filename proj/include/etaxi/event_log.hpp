#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace etaxi {

// Raw audit trail of a run. Metrics are recomputed from these records alone.
enum class LogKind : std::uint8_t {
    TaxiSpawned,       // a=taxi b=role c=state
    TaxiState,         // a=taxi b=from c=to
    RequestSpawned,    // a=request b=origin c=dest
    RequestAssigned,   // a=request b=taxi
    RequestPooled,     // a=request b=taxi
    RequestPickedUp,   // a=request b=taxi
    RequestDelivered,  // a=request b=taxi
    RequestCancelled,  // a=request
    RentalStarted,     // a=request b=car
    RentalEnded,       // a=request b=car c=site
    StationArrived,    // a=taxi b=station
    StationAdmitted,   // a=taxi b=station
    StationDeparted,   // a=taxi b=station
    MetricsSample,
    JamChanged,        // a=segment b=1 if jammed
    CommandApplied,    // a=command index b=command kind
    PromptIssued,      // a=prompt b=request
    PromptResolved,    // a=prompt b=choice c=1 if synthesized
    Stranded,          // a=taxi
};

const char* to_string(LogKind k);
LogKind log_kind_from_string(const std::string& s);

struct LogRecord {
    double time = 0.0;
    LogKind kind = LogKind::MetricsSample;
    int a = -1;
    int b = -1;
    int c = -1;
    friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

using EventLog = std::vector<LogRecord>;

}  // namespace etaxi
