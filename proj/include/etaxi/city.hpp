#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace etaxi {

using NodeId = int;
using SegmentId = int;
using TownId = int;
using StationId = int;

inline constexpr NodeId kNoNode = -1;
inline constexpr SegmentId kNoSegment = -1;

enum class PathPolicy { ShortestDistance, LeastTime };
enum class RoadState { Free, Jammed };

const char* to_string(PathPolicy p);
PathPolicy path_policy_from_string(const std::string& s);

struct Intersection {
    NodeId id = kNoNode;
    double x = 0.0;  // meters
    double y = 0.0;
    TownId town = 0;
};

struct RoadSegment {
    SegmentId id = kNoSegment;
    NodeId from = kNoNode;
    NodeId to = kNoNode;
    double length_m = 0.0;
    double free_speed = 0.0;  // m/s
    int jam_threshold = 5;    // vehicles
    double jam_factor = 3.0;  // speed divisor while jammed
};

struct Town {
    TownId id = 0;
    std::vector<NodeId> nodes;
    std::vector<NodeId> stops;  // subset of nodes, ascending
    NodeId center = kNoNode;    // stand-by stop used for spawning taxis
    double demand_weight = 1.0;
};

// Static description of a charging site. Queue and charger occupancy are run
// state and live in the simulation, not here.
struct StationSite {
    StationId id = 0;
    NodeId node = kNoNode;
    int charger_count = 1;
    double charge_rate_kw = 50.0;
};

struct Route {
    NodeId origin = kNoNode;
    NodeId destination = kNoNode;
    std::vector<SegmentId> segments;

    bool empty() const noexcept { return segments.empty(); }
    friend bool operator==(const Route&, const Route&) = default;
};

// Input to build_city. Either `preset` names a builtin layout, or the explicit
// node/segment lists describe the graph.
struct CitySpec {
    std::string preset;  // "eight-towns" or empty

    // eight-towns preset parameters
    int town_grid = 3;        // towns per side
    int block_nodes = 3;      // intersections per town side
    double spacing_m = 500.0;
    double arterial_speed = 16.0;  // lines that avoid town centers
    double local_speed = 8.0;      // lines through town centers
    double downtown_weight = 3.0;
    double town_weight = 1.0;

    int jam_threshold = 5;
    double jam_factor = 3.0;

    // explicit graph
    std::vector<Intersection> nodes;
    std::vector<RoadSegment> segments;  // ids are reassigned by position
    std::vector<Town> towns;            // empty: one town holding every node
    std::vector<NodeId> stops;          // empty: every node is a stop

    std::vector<StationSite> stations;  // ids are reassigned by position
    std::vector<NodeId> rental_sites;  // empty on the preset: downtown and its western neighbour
};

inline CitySpec eight_towns_spec() {
    CitySpec s;
    s.preset = "eight-towns";
    return s;
}

// Immutable congestible road graph. Occupancy lives in TrafficState.
class RoadNetwork {
public:
    RoadNetwork() = default;

    const std::vector<Intersection>& nodes() const noexcept { return nodes_; }
    const std::vector<RoadSegment>& segments() const noexcept { return segments_; }
    const std::vector<Town>& towns() const noexcept { return towns_; }
    const std::vector<NodeId>& stops() const noexcept { return stops_; }
    const std::vector<StationSite>& stations() const noexcept { return stations_; }
    const std::vector<NodeId>& rental_sites() const noexcept { return rental_sites_; }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t segment_count() const noexcept { return segments_.size(); }
    const RoadSegment& segment(SegmentId id) const { return segments_.at(static_cast<std::size_t>(id)); }
    const std::vector<SegmentId>& out_segments(NodeId n) const { return out_.at(static_cast<std::size_t>(n)); }
    const std::vector<SegmentId>& in_segments(NodeId n) const { return in_.at(static_cast<std::size_t>(n)); }

    bool valid_node(NodeId n) const noexcept { return n >= 0 && static_cast<std::size_t>(n) < nodes_.size(); }
    bool is_stop(NodeId n) const;
    bool is_rental_site(NodeId n) const;
    TownId town_of(NodeId n) const { return nodes_.at(static_cast<std::size_t>(n)).town; }
    const Town& town(TownId id) const;

    friend RoadNetwork build_city(const CitySpec& spec);

private:
    std::vector<Intersection> nodes_;
    std::vector<RoadSegment> segments_;
    std::vector<Town> towns_;
    std::vector<NodeId> stops_;
    std::vector<char> stop_mask_;
    std::vector<StationSite> stations_;
    std::vector<NodeId> rental_sites_;
    std::vector<std::vector<SegmentId>> out_;
    std::vector<std::vector<SegmentId>> in_;
};

// Throws ConstructionError on a disconnected graph, dangling ids, or a rental
// site count other than 0 or 2.
RoadNetwork build_city(const CitySpec& spec);

bool strongly_connected(const RoadNetwork& net);

// Seconds to traverse `seg` when it carries `occupancy` vehicles.
double edge_travel_time(const RoadSegment& seg, int occupancy);

// Traversal time as simulated: taxis move in whole seconds per segment.
inline double movement_time(const RoadSegment& seg, int occupancy) {
    return std::ceil(edge_travel_time(seg, occupancy));
}

inline RoadState road_state(const RoadSegment& seg, int occupancy) {
    return occupancy >= seg.jam_threshold ? RoadState::Jammed : RoadState::Free;
}

// Per-segment occupancy table. The jam version bumps on every FREE/JAMMED flip
// so cached travel times can be invalidated cheaply.
class TrafficState {
public:
    struct Update {
        RoadState state = RoadState::Free;
        bool changed = false;
    };

    TrafficState() = default;
    explicit TrafficState(const RoadNetwork& net);

    int occupancy(SegmentId s) const { return static_cast<int>(on_.at(static_cast<std::size_t>(s)).size()); }
    RoadState state(SegmentId s) const { return jammed_.at(static_cast<std::size_t>(s)) ? RoadState::Jammed : RoadState::Free; }
    bool jammed(SegmentId s) const { return jammed_.at(static_cast<std::size_t>(s)) != 0; }
    const std::vector<int>& vehicles_on(SegmentId s) const { return on_.at(static_cast<std::size_t>(s)); }
    std::uint64_t jam_version() const noexcept { return jam_version_; }
    int total_occupancy() const noexcept { return total_; }
    std::vector<SegmentId> jammed_segments() const;

    Update enter(SegmentId s, int vehicle);
    Update leave(SegmentId s, int vehicle);

private:
    std::vector<int> thresholds_;
    std::vector<std::vector<int>> on_;
    std::vector<char> jammed_;
    std::uint64_t jam_version_ = 0;
    int total_ = 0;
};

inline TrafficState::Update enter_segment(TrafficState& traffic, SegmentId seg, int taxi) {
    return traffic.enter(seg, taxi);
}
inline TrafficState::Update leave_segment(TrafficState& traffic, SegmentId seg, int taxi) {
    return traffic.leave(seg, taxi);
}

// Cost of a segment under a path policy at current occupancy.
double segment_cost(const RoadSegment& seg, const TrafficState& traffic, PathPolicy policy);
double route_length(const RoadNetwork& net, const Route& route);
double route_time(const RoadNetwork& net, const TrafficState& traffic, const Route& route);

// Shortest-path tree towards one destination. next[u] is the first segment of
// the lexicographically smallest optimal route from u; time[u] is the
// simulated (whole-second per segment) travel time along that route at the
// occupancies the tree was built with.
struct RouteTree {
    NodeId destination = kNoNode;
    std::vector<double> cost;
    std::vector<double> time;
    std::vector<SegmentId> next;

    bool reachable(NodeId from) const;
    Route route_from(const RoadNetwork& net, NodeId from) const;
};

RouteTree build_route_tree(const RoadNetwork& net, const TrafficState& traffic, NodeId destination,
                           PathPolicy policy, const std::vector<char>& excluded_mask);

// Pure routing. Throws NoPathError when every route uses an excluded segment.
Route plan_route(const RoadNetwork& net, const TrafficState& traffic, NodeId from, NodeId to, PathPolicy policy,
                 std::span<const SegmentId> excluded = {});

NodeId nearest_stop(const RoadNetwork& net, const TrafficState& traffic, NodeId from);

struct StationEta {
    StationId station = 0;
    double eta = 0.0;
};

// Stations (restricted to `candidates` when non-empty) ordered by LEAST_TIME
// travel time from `from`, ties by station id.
std::vector<StationEta> nearest_station_set(const RoadNetwork& net, const TrafficState& traffic, NodeId from,
                                            std::span<const StationId> candidates = {});

// Forward LEAST_TIME travel times from one node to every node.
std::vector<double> travel_times_from(const RoadNetwork& net, const TrafficState& traffic, NodeId from);

// Memoizes route trees per destination; the whole cache drops when the jam
// version moves. Planning avoids currently jammed segments and falls back to
// the unrestricted route when that leaves no path.
class Router {
public:
    Route route(const RoadNetwork& net, const TrafficState& traffic, NodeId from, NodeId to, PathPolicy policy);
    double travel_time(const RoadNetwork& net, const TrafficState& traffic, NodeId from, NodeId to,
                       PathPolicy policy);
    const RouteTree& tree(const RoadNetwork& net, const TrafficState& traffic, NodeId to, PathPolicy policy,
                          bool avoid_jams);

    // Replans excluding `excluded`, returning nullopt on NoPath.
    std::optional<Route> route_excluding(const RoadNetwork& net, const TrafficState& traffic, NodeId from,
                                         NodeId to, PathPolicy policy, std::span<const SegmentId> excluded);

    void clear() { cache_.clear(); }

private:
    void sync(const TrafficState& traffic);

    std::uint64_t version_ = ~std::uint64_t{0};
    std::unordered_map<std::int64_t, RouteTree> cache_;
};

}  // namespace etaxi
