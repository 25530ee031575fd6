#pragma once

// Small hand-built cities and scenario helpers shared by the simulation tests.

#include "etaxi/scenario.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fixture {

struct Road {
    etaxi::NodeId a;
    etaxi::NodeId b;
    double length_m;
};

// Two-way roads at one speed; each entry of `town_weights` is a town holding
// the single node with the same index.
inline etaxi::CitySpec small_city(const std::vector<std::pair<double, double>>& xy, const std::vector<Road>& roads,
                                  const std::vector<double>& town_weights, double speed = 10.0) {
    etaxi::CitySpec s;
    for (std::size_t i = 0; i < xy.size(); ++i)
        s.nodes.push_back({static_cast<int>(i), xy[i].first, xy[i].second, 0});
    for (const auto& r : roads) {
        etaxi::RoadSegment f;
        f.from = r.a;
        f.to = r.b;
        f.length_m = r.length_m;
        f.free_speed = speed;
        etaxi::RoadSegment g = f;
        g.from = r.b;
        g.to = r.a;
        s.segments.push_back(f);
        s.segments.push_back(g);
    }
    for (std::size_t i = 0; i < town_weights.size(); ++i) {
        etaxi::Town t;
        t.id = static_cast<int>(i) + 1;
        t.nodes = {static_cast<int>(i)};
        t.demand_weight = town_weights[i];
        s.towns.push_back(t);
    }
    return s;
}

// Scenario on a small city with one arrival every `mean` seconds exactly.
inline etaxi::ScenarioConfig tiny(etaxi::CitySpec city, int fleet, double mean, double horizon) {
    etaxi::ScenarioConfig c;
    c.city = std::move(city);
    c.fleet_size = fleet;
    c.station_count = 1;
    c.demand.base_mean_interarrival = mean;
    c.demand.interarrival_stddev = 0.0;
    c.horizon = horizon;
    return c;
}

inline std::string config_dir() {
    return ETAXI_SOURCE_DIR "/config";
}

inline etaxi::ScenarioConfig default_scenario() {
    return etaxi::load_scenario(config_dir() + "/default_scenario.json");
}

}  // namespace fixture
