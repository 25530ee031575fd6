#include "etaxi/scenario.hpp"

#include "etaxi/errors.hpp"
#include "etaxi/rng.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace etaxi {

using nlohmann::json;

void ScenarioConfig::validate() const {
    if (fleet_size < 1) throw ConfigError("fleet_size must be >= 1");
    if (seats < 1) throw ConfigError("seats must be >= 1");
    if (station_count < 1) throw ConfigError("station_count must be >= 1");
    if (chargers_per_station < 1) throw ConfigError("chargers_per_station must be >= 1");
    if (!(charge_rate_kw > 0.0)) throw ConfigError("charge_rate_kw must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (!(metrics_interval > 0.0)) throw ConfigError("metrics_interval must be positive");
    if (!(dispatch_interval >= 0.0)) throw ConfigError("dispatch_interval must be >= 0");
    if (!(initial_soc_min > 0.0 && initial_soc_min <= initial_soc_max && initial_soc_max <= 1.0))
        throw ConfigError("initial state of charge must satisfy 0 < min <= max <= 1");
    if (!(negotiation.timeout > 0.0)) throw ConfigError("negotiation timeout must be positive");
    demand.validate();
    battery.validate();
    policy.validate();
    if (policy.carsharing && city.preset.empty() && city.rental_sites.size() != 2)
        throw ConfigError("car-sharing needs exactly two rental sites");
    split_fleet(fleet_size, policy.rental_fraction, policy.carsharing);
}

std::vector<NodeId> resolved_candidates(const ScenarioConfig& cfg, const RoadNetwork& net) {
    if (!cfg.station_candidates.empty()) return cfg.station_candidates;
    return net.stops();
}

CitySpec resolved_city(const ScenarioConfig& cfg) {
    CitySpec spec = cfg.city;
    spec.stations.clear();
    std::vector<NodeId> candidates = cfg.station_candidates;
    if (candidates.empty()) {
        CitySpec bare = spec;
        candidates = build_city(bare).stops();
    }
    for (NodeId n : candidates) spec.stations.push_back({0, n, cfg.chargers_per_station, cfg.charge_rate_kw});
    return spec;
}

DemandProfile effective_profile(const ScenarioConfig& cfg) {
    DemandProfile p = cfg.demand;
    if (cfg.rush_hour && p.schedule.empty()) p.schedule.push_back({0.0, 4.0});
    return p;
}

json city_to_json(const CitySpec& s) {
    json j;
    if (!s.preset.empty()) {
        j["preset"] = s.preset;
        j["town_grid"] = s.town_grid;
        j["block_nodes"] = s.block_nodes;
        j["spacing_m"] = s.spacing_m;
        j["arterial_speed"] = s.arterial_speed;
        j["local_speed"] = s.local_speed;
        j["downtown_weight"] = s.downtown_weight;
        j["town_weight"] = s.town_weight;
    } else {
        json nodes = json::array();
        for (const auto& n : s.nodes) nodes.push_back({{"x", n.x}, {"y", n.y}});
        j["nodes"] = nodes;
        json segs = json::array();
        for (const auto& g : s.segments)
            segs.push_back({{"from", g.from}, {"to", g.to}, {"length_m", g.length_m}, {"free_speed", g.free_speed},
                            {"jam_threshold", g.jam_threshold}, {"jam_factor", g.jam_factor}});
        j["segments"] = segs;
        json towns = json::array();
        for (const auto& t : s.towns)
            towns.push_back({{"nodes", t.nodes}, {"demand_weight", t.demand_weight}});
        j["towns"] = towns;
        j["stops"] = s.stops;
    }
    j["jam_threshold"] = s.jam_threshold;
    j["jam_factor"] = s.jam_factor;
    j["rental_sites"] = s.rental_sites;
    return j;
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

}  // namespace

CitySpec city_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("city must be an object");
    CitySpec s;
    read(j, "preset", s.preset);
    read(j, "town_grid", s.town_grid);
    read(j, "block_nodes", s.block_nodes);
    read(j, "spacing_m", s.spacing_m);
    read(j, "arterial_speed", s.arterial_speed);
    read(j, "local_speed", s.local_speed);
    read(j, "downtown_weight", s.downtown_weight);
    read(j, "town_weight", s.town_weight);
    read(j, "jam_threshold", s.jam_threshold);
    read(j, "jam_factor", s.jam_factor);
    read(j, "rental_sites", s.rental_sites);
    if (s.preset.empty()) {
        if (!j.contains("nodes") || !j.contains("segments"))
            throw ConfigError("city needs a preset or explicit nodes and segments");
        int id = 0;
        for (const auto& n : j.at("nodes")) {
            Intersection in;
            in.id = id++;
            in.x = n.value("x", 0.0);
            in.y = n.value("y", 0.0);
            s.nodes.push_back(in);
        }
        for (const auto& g : j.at("segments")) {
            RoadSegment seg;
            try {
                seg.from = g.at("from").get<int>();
                seg.to = g.at("to").get<int>();
                seg.length_m = g.at("length_m").get<double>();
                seg.free_speed = g.at("free_speed").get<double>();
            } catch (const json::exception& e) {
                throw ConfigError(std::string("bad segment: ") + e.what());
            }
            seg.jam_threshold = g.value("jam_threshold", s.jam_threshold);
            seg.jam_factor = g.value("jam_factor", s.jam_factor);
            s.segments.push_back(seg);
        }
        if (j.contains("towns")) {
            int tid = 1;
            for (const auto& t : j.at("towns")) {
                Town town;
                town.id = tid++;
                read(t, "nodes", town.nodes);
                read(t, "demand_weight", town.demand_weight);
                s.towns.push_back(town);
            }
        }
        read(j, "stops", s.stops);
    }
    return s;
}

json to_json(const ScenarioConfig& c) {
    json j;
    j["city"] = city_to_json(c.city);
    j["fleet_size"] = c.fleet_size;
    j["seats"] = c.seats;
    j["stations"] = {{"candidates", c.station_candidates},
                     {"count", c.station_count},
                     {"chargers", c.chargers_per_station},
                     {"charge_rate_kw", c.charge_rate_kw}};
    json sched = json::array();
    for (const auto& w : c.demand.schedule) sched.push_back({{"from", w.from}, {"multiplier", w.multiplier}});
    j["demand"] = {{"base_mean_interarrival", c.demand.base_mean_interarrival},
                   {"interarrival_stddev", c.demand.interarrival_stddev},
                   {"min_interarrival", c.demand.min_interarrival},
                   {"rush_hour", c.rush_hour},
                   {"schedule", sched}};
    j["battery"] = {{"capacity_kwh", c.battery.capacity_kwh},
                    {"drive_kwh_per_km", c.battery.drive_kwh_per_km},
                    {"idle_kwh_per_hour", c.battery.idle_kwh_per_hour},
                    {"reserve_fraction", c.battery.reserve_fraction},
                    {"initial_soc_min", c.initial_soc_min},
                    {"initial_soc_max", c.initial_soc_max}};
    j["policy"] = {{"path_policy", to_string(c.policy.path_policy)},
                   {"carpool", c.policy.carpool},
                   {"carsharing", c.policy.carsharing},
                   {"rental_fraction", c.policy.rental_fraction},
                   {"carpool_detour_factor", c.policy.carpool_detour_factor},
                   {"negotiation_wait_threshold", c.policy.negotiation_wait_threshold}};
    j["negotiation"] = {{"enabled", c.negotiation.enabled}, {"timeout", c.negotiation.timeout}};
    j["dispatch_interval"] = c.dispatch_interval;
    j["metrics_interval"] = c.metrics_interval;
    j["horizon"] = c.horizon;
    j["seed"] = c.seed;
    j["notes"] = c.notes;
    return j;
}

ScenarioConfig scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    ScenarioConfig c;
    if (j.contains("city")) c.city = city_from_json(j.at("city"));
    else c.city.preset = "eight-towns";
    read(j, "fleet_size", c.fleet_size);
    read(j, "seats", c.seats);
    if (j.contains("stations")) {
        const json& s = j.at("stations");
        read(s, "candidates", c.station_candidates);
        read(s, "count", c.station_count);
        read(s, "chargers", c.chargers_per_station);
        read(s, "charge_rate_kw", c.charge_rate_kw);
    }
    if (j.contains("demand")) {
        const json& d = j.at("demand");
        read(d, "base_mean_interarrival", c.demand.base_mean_interarrival);
        read(d, "interarrival_stddev", c.demand.interarrival_stddev);
        read(d, "min_interarrival", c.demand.min_interarrival);
        read(d, "rush_hour", c.rush_hour);
        if (d.contains("schedule")) {
            for (const auto& w : d.at("schedule"))
                c.demand.schedule.push_back({w.value("from", 0.0), w.value("multiplier", 1.0)});
        }
    }
    if (j.contains("battery")) {
        const json& b = j.at("battery");
        read(b, "capacity_kwh", c.battery.capacity_kwh);
        read(b, "drive_kwh_per_km", c.battery.drive_kwh_per_km);
        read(b, "idle_kwh_per_hour", c.battery.idle_kwh_per_hour);
        read(b, "reserve_fraction", c.battery.reserve_fraction);
        read(b, "initial_soc_min", c.initial_soc_min);
        read(b, "initial_soc_max", c.initial_soc_max);
    }
    if (j.contains("policy")) {
        const json& p = j.at("policy");
        if (p.contains("path_policy")) c.policy.path_policy = path_policy_from_string(p.at("path_policy").get<std::string>());
        read(p, "carpool", c.policy.carpool);
        read(p, "carsharing", c.policy.carsharing);
        read(p, "rental_fraction", c.policy.rental_fraction);
        read(p, "carpool_detour_factor", c.policy.carpool_detour_factor);
        read(p, "negotiation_wait_threshold", c.policy.negotiation_wait_threshold);
    }
    if (j.contains("negotiation")) {
        read(j.at("negotiation"), "enabled", c.negotiation.enabled);
        read(j.at("negotiation"), "timeout", c.negotiation.timeout);
    }
    read(j, "dispatch_interval", c.dispatch_interval);
    read(j, "metrics_interval", c.metrics_interval);
    read(j, "horizon", c.horizon);
    read(j, "seed", c.seed);
    read(j, "notes", c.notes);
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << to_json(cfg).dump(2) << '\n';
}

std::string config_hash(const ScenarioConfig& cfg) {
    json j = to_json(cfg);
    j.erase("seed");
    j.erase("notes");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

}  // namespace etaxi
