#pragma once

#include "etaxi/city.hpp"
#include "etaxi/demand.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace etaxi {

enum class CommandKind {
    Pause,
    Resume,
    StepUntil,
    SetGenerationRate,
    SetFleetSize,
    SetStationCount,
    SetPolicy,
    ForceAssign,
    RerouteTaxi,
    NegotiationReply,
};

enum class NegotiationChoice { KeepWaiting, OfferCarpool, CancelRequest };

const char* to_string(CommandKind k);
const char* to_string(NegotiationChoice c);
CommandKind command_kind_from_string(const std::string& s);
NegotiationChoice negotiation_choice_from_string(const std::string& s);

struct PolicyPatch {
    std::optional<PathPolicy> path_policy;
    std::optional<bool> carpool;
    std::optional<bool> carsharing;
    std::optional<double> carpool_detour_factor;
    std::optional<double> negotiation_wait_threshold;
    friend bool operator==(const PolicyPatch&, const PolicyPatch&) = default;
};

struct Command {
    double time = 0.0;
    bool now = false;  // stamp with the clock at receipt
    CommandKind kind = CommandKind::Pause;

    double value = 0.0;  // SetGenerationRate multiplier, StepUntil target
    int count = 0;       // SetFleetSize, SetStationCount
    PolicyPatch policy;
    RequestId request = kNone;
    TaxiId taxi = kNone;
    NodeId node = kNoNode;
    int prompt = kNone;
    NegotiationChoice choice = NegotiationChoice::KeepWaiting;

    bool synthesized = false;  // produced by the engine (negotiation timeout)

    friend bool operator==(const Command&, const Command&) = default;
};

nlohmann::json to_json(const Command& c);
// CommandError(index, reason) on malformed input.
Command command_from_json(const nlohmann::json& j, std::size_t index = 0);

nlohmann::json log_to_json(const std::vector<Command>& log);
std::vector<Command> log_from_json(const nlohmann::json& j);

struct NegotiationPrompt {
    int id = kNone;
    RequestId request = kNone;
    double issued_at = 0.0;
    double timeout = 30.0;
    NegotiationChoice default_choice = NegotiationChoice::KeepWaiting;
    bool resolved = false;
    NegotiationChoice resolution = NegotiationChoice::KeepWaiting;
    bool by_timeout = false;
    friend bool operator==(const NegotiationPrompt&, const NegotiationPrompt&) = default;
};

}  // namespace etaxi
