#include "etaxi/commands.hpp"

#include "etaxi/errors.hpp"

#include <cmath>

namespace etaxi {

using nlohmann::json;

namespace {
constexpr const char* kKinds[] = {"Pause",           "Resume",       "StepUntil",        "SetGenerationRate",
                                  "SetFleetSize",    "SetStationCount", "SetPolicy",     "ForceAssign",
                                  "RerouteTaxi",     "NegotiationReply"};
constexpr const char* kChoices[] = {"KEEP_WAITING", "OFFER_CARPOOL", "CANCEL_REQUEST"};
}  // namespace

const char* to_string(CommandKind k) { return kKinds[static_cast<int>(k)]; }
const char* to_string(NegotiationChoice c) { return kChoices[static_cast<int>(c)]; }

CommandKind command_kind_from_string(const std::string& s) {
    for (int i = 0; i < static_cast<int>(std::size(kKinds)); ++i)
        if (s == kKinds[i]) return static_cast<CommandKind>(i);
    throw CommandError(0, "unknown command kind '" + s + "'");
}

NegotiationChoice negotiation_choice_from_string(const std::string& s) {
    for (int i = 0; i < static_cast<int>(std::size(kChoices)); ++i)
        if (s == kChoices[i]) return static_cast<NegotiationChoice>(i);
    throw CommandError(0, "unknown negotiation choice '" + s + "'");
}

json to_json(const Command& c) {
    json j;
    j["kind"] = to_string(c.kind);
    if (c.now) j["time"] = "now";
    else j["time"] = c.time;
    switch (c.kind) {
        case CommandKind::Pause:
        case CommandKind::Resume:
            break;
        case CommandKind::StepUntil:
            j["until"] = c.value;
            break;
        case CommandKind::SetGenerationRate:
            j["multiplier"] = c.value;
            break;
        case CommandKind::SetFleetSize:
        case CommandKind::SetStationCount:
            j["count"] = c.count;
            break;
        case CommandKind::SetPolicy: {
            json p = json::object();
            if (c.policy.path_policy) p["path_policy"] = to_string(*c.policy.path_policy);
            if (c.policy.carpool) p["carpool"] = *c.policy.carpool;
            if (c.policy.carsharing) p["carsharing"] = *c.policy.carsharing;
            if (c.policy.carpool_detour_factor) p["carpool_detour_factor"] = *c.policy.carpool_detour_factor;
            if (c.policy.negotiation_wait_threshold)
                p["negotiation_wait_threshold"] = *c.policy.negotiation_wait_threshold;
            j["policy"] = p;
            break;
        }
        case CommandKind::ForceAssign:
            j["request"] = c.request;
            j["taxi"] = c.taxi;
            break;
        case CommandKind::RerouteTaxi:
            j["taxi"] = c.taxi;
            j["node"] = c.node;
            break;
        case CommandKind::NegotiationReply:
            j["prompt"] = c.prompt;
            j["choice"] = to_string(c.choice);
            break;
    }
    if (c.synthesized) j["synthesized"] = true;
    return j;
}

Command command_from_json(const json& j, std::size_t index) {
    auto fail = [index](const std::string& why) { return CommandError(index, why); };
    if (!j.is_object()) throw fail("command must be a JSON object");
    if (!j.contains("kind") || !j.at("kind").is_string()) throw fail("command needs a string 'kind'");
    Command c;
    try {
        c.kind = command_kind_from_string(j.at("kind").get<std::string>());
    } catch (const CommandError& e) {
        throw fail(e.reason());
    }
    const json t = j.value("time", json("now"));
    if (t.is_string()) {
        if (t.get<std::string>() != "now") throw fail("time must be a number or \"now\"");
        c.now = true;
    } else if (t.is_number()) {
        c.time = t.get<double>();
        if (!std::isfinite(c.time) || c.time < 0.0) throw fail("time must be finite and >= 0");
    } else {
        throw fail("time must be a number or \"now\"");
    }
    auto need_int = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number_integer()) throw fail(std::string("missing integer '") + key + "'");
        return j.at(key).get<int>();
    };
    auto need_num = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number()) throw fail(std::string("missing number '") + key + "'");
        return j.at(key).get<double>();
    };
    switch (c.kind) {
        case CommandKind::Pause:
        case CommandKind::Resume:
            break;
        case CommandKind::StepUntil:
            c.value = need_num("until");
            break;
        case CommandKind::SetGenerationRate:
            c.value = need_num("multiplier");
            if (!(c.value > 0.0) || !std::isfinite(c.value)) throw fail("multiplier must be > 0");
            break;
        case CommandKind::SetFleetSize:
        case CommandKind::SetStationCount:
            c.count = need_int("count");
            if (c.count < 1) throw fail("count must be >= 1");
            break;
        case CommandKind::SetPolicy: {
            if (!j.contains("policy") || !j.at("policy").is_object()) throw fail("missing object 'policy'");
            const json& p = j.at("policy");
            try {
                if (p.contains("path_policy"))
                    c.policy.path_policy = path_policy_from_string(p.at("path_policy").get<std::string>());
                if (p.contains("carpool")) c.policy.carpool = p.at("carpool").get<bool>();
                if (p.contains("carsharing")) c.policy.carsharing = p.at("carsharing").get<bool>();
                if (p.contains("carpool_detour_factor"))
                    c.policy.carpool_detour_factor = p.at("carpool_detour_factor").get<double>();
                if (p.contains("negotiation_wait_threshold"))
                    c.policy.negotiation_wait_threshold = p.at("negotiation_wait_threshold").get<double>();
            } catch (const std::exception& e) {
                throw fail(std::string("bad policy: ") + e.what());
            }
            if (c.policy.carpool_detour_factor && !(*c.policy.carpool_detour_factor >= 1.0))
                throw fail("carpool_detour_factor must be >= 1");
            if (c.policy.negotiation_wait_threshold && !(*c.policy.negotiation_wait_threshold >= 0.0))
                throw fail("negotiation_wait_threshold must be >= 0");
            break;
        }
        case CommandKind::ForceAssign:
            c.request = need_int("request");
            c.taxi = need_int("taxi");
            break;
        case CommandKind::RerouteTaxi:
            c.taxi = need_int("taxi");
            c.node = need_int("node");
            break;
        case CommandKind::NegotiationReply:
            c.prompt = need_int("prompt");
            if (!j.contains("choice") || !j.at("choice").is_string()) throw fail("missing string 'choice'");
            try {
                c.choice = negotiation_choice_from_string(j.at("choice").get<std::string>());
            } catch (const CommandError& e) {
                throw fail(e.reason());
            }
            break;
    }
    c.synthesized = j.value("synthesized", false);
    return c;
}

json log_to_json(const std::vector<Command>& log) {
    json arr = json::array();
    for (const auto& c : log) arr.push_back(to_json(c));
    return arr;
}

std::vector<Command> log_from_json(const json& j) {
    if (!j.is_array()) throw CommandError(0, "command log must be a JSON array");
    std::vector<Command> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(command_from_json(j[i], i));
    return out;
}

}  // namespace etaxi
