#pragma once

#include "etaxi/commands.hpp"
#include "etaxi/fleet.hpp"
#include "etaxi/metrics.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace etaxi {

struct TaxiView {
    TaxiId id = kNone;
    std::string role;
    std::string state;
    NodeId node = kNoNode;          // current node, or segment start while moving
    SegmentId segment = kNoSegment;
    double progress = 0.0;          // fraction of the segment covered
    double x = 0.0;
    double y = 0.0;
    double battery_kwh = 0.0;
    std::vector<RequestId> onboard;
    std::vector<PlanStop> plan;
    std::vector<SegmentId> route;
    NodeId target = kNoNode;
    StationId station = -1;
    bool retiring = false;
    bool stranded = false;
    friend bool operator==(const TaxiView&, const TaxiView&) = default;
};

struct StationView {
    StationId id = 0;
    NodeId node = kNoNode;
    bool active = true;
    int chargers = 1;
    std::string state;  // BUSY when every charger is occupied
    std::vector<TaxiId> queue;
    std::vector<TaxiId> in_service;
    friend bool operator==(const StationView&, const StationView&) = default;
};

struct RoadView {
    SegmentId id = kNoSegment;
    int occupancy = 0;
    bool jammed = false;
    friend bool operator==(const RoadView&, const RoadView&) = default;
};

struct RequestView {
    RequestId id = kNone;
    double call_time = 0.0;
    NodeId origin = kNoNode;
    NodeId dest = kNoNode;
    std::string status;
    TaxiId taxi = kNone;
    friend bool operator==(const RequestView&, const RequestView&) = default;
};

// Immutable observation of a run at an event boundary.
struct SimSnapshot {
    double time = 0.0;
    std::vector<TaxiView> taxis;      // every vehicle not retired
    std::vector<StationView> stations;
    std::vector<RoadView> roads;
    std::vector<RequestView> pending;  // requests still in the system
    std::vector<NegotiationPrompt> prompts;  // unresolved
    MetricsReport metrics;             // scalars so far; no series
    friend bool operator==(const SimSnapshot&, const SimSnapshot&) = default;
};

nlohmann::json to_json(const SimSnapshot& s);
SimSnapshot snapshot_from_json(const nlohmann::json& j);

nlohmann::json to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NegotiationPrompt& p);
NegotiationPrompt prompt_from_json(const nlohmann::json& j);

}  // namespace etaxi
