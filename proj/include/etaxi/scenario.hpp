#pragma once

#include "etaxi/city.hpp"
#include "etaxi/demand.hpp"
#include "etaxi/dispatch.hpp"
#include "etaxi/fleet.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace etaxi {

struct NegotiationConfig {
    bool enabled = false;
    double timeout = 30.0;  // virtual seconds
};

// One runnable experiment cell.
struct ScenarioConfig {
    CitySpec city = eight_towns_spec();  // stations come from station_candidates below

    int fleet_size = 11;
    int seats = 4;

    std::vector<NodeId> station_candidates;  // activation order; empty: every stop
    int station_count = 8;
    int chargers_per_station = 1;
    double charge_rate_kw = 50.0;

    DemandProfile demand;
    bool rush_hour = false;  // multiplier 4 for the whole run when no schedule is given

    BatteryModel battery;
    double initial_soc_min = 1.0;  // initial charge drawn uniformly in [min, max] of capacity
    double initial_soc_max = 1.0;

    PolicyConfig policy;
    NegotiationConfig negotiation;

    double dispatch_interval = 0.0;  // 0: requests are handled on arrival
    double metrics_interval = 60.0;
    double horizon = 14400.0;
    std::uint64_t seed = 1;

    std::vector<std::string> notes;

    void validate() const;  // ConfigError
};

// City spec with the candidate stations attached, as handed to build_city.
CitySpec resolved_city(const ScenarioConfig& cfg);
std::vector<NodeId> resolved_candidates(const ScenarioConfig& cfg, const RoadNetwork& net);
DemandProfile effective_profile(const ScenarioConfig& cfg);

nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);  // ConfigError on bad input
ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

// Hex FNV-1a of the canonical JSON with the seed removed, so paired cells
// that differ only in seed share a hash.
std::string config_hash(const ScenarioConfig& cfg);

nlohmann::json city_to_json(const CitySpec& spec);
CitySpec city_from_json(const nlohmann::json& j);

}  // namespace etaxi
