#include "etaxi/event_log.hpp"

#include "etaxi/errors.hpp"

namespace etaxi {

namespace {
constexpr const char* kNames[] = {
    "TaxiSpawned",    "TaxiState",       "RequestSpawned",  "RequestAssigned", "RequestPooled",
    "RequestPickedUp", "RequestDelivered", "RequestCancelled", "RentalStarted",   "RentalEnded",
    "StationArrived", "StationAdmitted", "StationDeparted", "MetricsSample",   "JamChanged",
    "CommandApplied", "PromptIssued",    "PromptResolved",  "Stranded",
};
}

const char* to_string(LogKind k) { return kNames[static_cast<int>(k)]; }

LogKind log_kind_from_string(const std::string& s) {
    for (int i = 0; i < static_cast<int>(std::size(kNames)); ++i)
        if (s == kNames[i]) return static_cast<LogKind>(i);
    throw LogError("unknown log record kind: " + s);
}

}  // namespace etaxi
