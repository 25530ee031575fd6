#include "etaxi/city.hpp"

#include "etaxi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

namespace etaxi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using QueueItem = std::pair<double, NodeId>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

void build_eight_towns(const CitySpec& spec, std::vector<Intersection>& nodes, std::vector<RoadSegment>& segments,
                       std::vector<Town>& towns, std::vector<NodeId>& stops) {
    const int g = spec.town_grid;
    const int b = spec.block_nodes;
    if (g < 1 || b < 1 || spec.spacing_m <= 0.0) throw ConstructionError("eight-towns: bad grid parameters");
    const int n = g * b;

    auto id_of = [n](int r, int c) { return r * n + c; };
    auto through_center = [b](int line) { return line % b == b / 2; };

    towns.resize(static_cast<std::size_t>(g * g));
    const int downtown = (g / 2) * g + (g / 2);
    for (int t = 0; t < g * g; ++t) {
        Town& town = towns[static_cast<std::size_t>(t)];
        town.id = t + 1;
        town.demand_weight = t == downtown ? spec.downtown_weight : spec.town_weight;
        const int tr = t / g;
        const int tc = t % g;
        town.center = id_of(tr * b + b / 2, tc * b + b / 2);
    }

    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            Intersection node;
            node.id = id_of(r, c);
            node.x = c * spec.spacing_m;
            node.y = r * spec.spacing_m;
            node.town = (r / b) * g + (c / b) + 1;
            nodes.push_back(node);
        }
    }

    auto add = [&](NodeId from, NodeId to, double speed) {
        RoadSegment s;
        s.from = from;
        s.to = to;
        s.length_m = spec.spacing_m;
        s.free_speed = speed;
        s.jam_threshold = spec.jam_threshold;
        s.jam_factor = spec.jam_factor;
        segments.push_back(s);
    };
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            if (c + 1 < n) {
                const double v = through_center(r) ? spec.local_speed : spec.arterial_speed;
                add(id_of(r, c), id_of(r, c + 1), v);
                add(id_of(r, c + 1), id_of(r, c), v);
            }
            if (r + 1 < n) {
                const double v = through_center(c) ? spec.local_speed : spec.arterial_speed;
                add(id_of(r, c), id_of(r + 1, c), v);
                add(id_of(r + 1, c), id_of(r, c), v);
            }
        }
    }

    for (const Town& t : towns) stops.push_back(t.center);
    std::sort(stops.begin(), stops.end());
}

std::vector<char> reachable_from(const RoadNetwork& net, NodeId start, bool forward) {
    std::vector<char> seen(net.node_count(), 0);
    std::vector<NodeId> stack{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!stack.empty()) {
        const NodeId u = stack.back();
        stack.pop_back();
        const auto& edges = forward ? net.out_segments(u) : net.in_segments(u);
        for (SegmentId s : edges) {
            const RoadSegment& seg = net.segment(s);
            const NodeId v = forward ? seg.to : seg.from;
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace

const char* to_string(PathPolicy p) {
    return p == PathPolicy::LeastTime ? "LEAST_TIME" : "SHORTEST_DISTANCE";
}

PathPolicy path_policy_from_string(const std::string& s) {
    if (s == "LEAST_TIME") return PathPolicy::LeastTime;
    if (s == "SHORTEST_DISTANCE") return PathPolicy::ShortestDistance;
    throw ConfigError("unknown path policy '" + s + "'");
}

bool RoadNetwork::is_stop(NodeId n) const {
    return valid_node(n) && stop_mask_[static_cast<std::size_t>(n)] != 0;
}

bool RoadNetwork::is_rental_site(NodeId n) const {
    return std::find(rental_sites_.begin(), rental_sites_.end(), n) != rental_sites_.end();
}

const Town& RoadNetwork::town(TownId id) const {
    if (id < 1 || static_cast<std::size_t>(id) > towns_.size()) throw std::out_of_range("unknown town");
    return towns_[static_cast<std::size_t>(id - 1)];
}

RoadNetwork build_city(const CitySpec& spec) {
    RoadNetwork net;
    std::vector<Town> towns;
    std::vector<NodeId> stops;

    if (spec.preset == "eight-towns") {
        build_eight_towns(spec, net.nodes_, net.segments_, towns, stops);
    } else if (!spec.preset.empty()) {
        throw ConstructionError("unknown city preset '" + spec.preset + "'");
    } else {
        net.nodes_ = spec.nodes;
        net.segments_ = spec.segments;
        towns = spec.towns;
        stops = spec.stops;
    }

    const std::size_t n = net.nodes_.size();
    if (n == 0) throw ConstructionError("city has no nodes");
    for (std::size_t i = 0; i < n; ++i) {
        if (net.nodes_[i].id != static_cast<NodeId>(i)) throw ConstructionError("node ids must equal their position");
    }

    net.out_.assign(n, {});
    net.in_.assign(n, {});
    for (std::size_t i = 0; i < net.segments_.size(); ++i) {
        RoadSegment& s = net.segments_[i];
        s.id = static_cast<SegmentId>(i);
        if (!net.valid_node(s.from) || !net.valid_node(s.to)) throw ConstructionError("segment references unknown node");
        if (s.from == s.to) throw ConstructionError("self-loop segment");
        if (!(s.length_m > 0.0) || !(s.free_speed > 0.0)) throw ConstructionError("segment length and speed must be > 0");
        if (s.jam_threshold < 1 || !(s.jam_factor > 1.0)) throw ConstructionError("jam threshold >= 1 and factor > 1 required");
        net.out_[static_cast<std::size_t>(s.from)].push_back(s.id);
        net.in_[static_cast<std::size_t>(s.to)].push_back(s.id);
    }

    if (towns.empty()) {
        Town t;
        t.id = 1;
        for (std::size_t i = 0; i < n; ++i) t.nodes.push_back(static_cast<NodeId>(i));
        towns.push_back(std::move(t));
    }
    if (spec.preset == "eight-towns") {
        for (const Intersection& node : net.nodes_) towns[static_cast<std::size_t>(node.town - 1)].nodes.push_back(node.id);
    }
    std::vector<int> owner(n, 0);
    for (std::size_t t = 0; t < towns.size(); ++t) {
        Town& town = towns[t];
        if (town.id != static_cast<TownId>(t + 1)) throw ConstructionError("town ids must be 1..T in order");
        if (town.demand_weight < 0.0) throw ConstructionError("town demand weight must be >= 0");
        for (NodeId v : town.nodes) {
            if (!net.valid_node(v)) throw ConstructionError("town references unknown node");
            if (owner[static_cast<std::size_t>(v)] != 0) throw ConstructionError("node belongs to two towns");
            owner[static_cast<std::size_t>(v)] = town.id;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (owner[i] == 0) throw ConstructionError("node " + std::to_string(i) + " belongs to no town");
        net.nodes_[i].town = owner[i];
    }

    if (stops.empty()) {
        for (std::size_t i = 0; i < n; ++i) stops.push_back(static_cast<NodeId>(i));
    }
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());
    net.stop_mask_.assign(n, 0);
    for (NodeId s : stops) {
        if (!net.valid_node(s)) throw ConstructionError("stop references unknown node");
        net.stop_mask_[static_cast<std::size_t>(s)] = 1;
    }
    net.stops_ = stops;

    for (Town& town : towns) {
        std::sort(town.nodes.begin(), town.nodes.end());
        town.stops.clear();
        for (NodeId v : town.nodes) {
            if (net.stop_mask_[static_cast<std::size_t>(v)]) town.stops.push_back(v);
        }
        if (!net.valid_node(town.center) || owner[static_cast<std::size_t>(town.center)] != town.id) {
            town.center = town.stops.empty() ? town.nodes.front() : town.stops.front();
        }
    }
    net.towns_ = std::move(towns);

    std::vector<NodeId> sites = spec.rental_sites;
    if (sites.empty() && spec.preset == "eight-towns" && net.towns_.size() >= 2) {
        // downtown and its western neighbour
        const int g = spec.town_grid;
        const std::size_t downtown = static_cast<std::size_t>((g / 2) * g + (g / 2));
        sites = {net.towns_[downtown].center, net.towns_[downtown == 0 ? 1 : downtown - 1].center};
    }
    if (sites.size() != 0 && sites.size() != 2) {
        throw ConstructionError("rental_sites must hold exactly 0 or 2 nodes");
    }
    for (NodeId v : sites) {
        if (!net.valid_node(v)) throw ConstructionError("rental site references unknown node");
    }
    if (sites.size() == 2 && sites[0] == sites[1]) {
        throw ConstructionError("rental sites must be distinct");
    }
    net.rental_sites_ = sites;

    net.stations_ = spec.stations;
    for (std::size_t i = 0; i < net.stations_.size(); ++i) {
        StationSite& st = net.stations_[i];
        st.id = static_cast<StationId>(i);
        if (!net.valid_node(st.node)) throw ConstructionError("station references unknown node");
        if (st.charger_count < 1 || !(st.charge_rate_kw > 0.0)) throw ConstructionError("station needs >= 1 charger and rate > 0");
    }

    if (!strongly_connected(net)) throw ConstructionError("road graph is not strongly connected");
    return net;
}

bool strongly_connected(const RoadNetwork& net) {
    if (net.node_count() == 0) return false;
    const auto fwd = reachable_from(net, 0, true);
    const auto bwd = reachable_from(net, 0, false);
    return std::all_of(fwd.begin(), fwd.end(), [](char c) { return c != 0; }) &&
           std::all_of(bwd.begin(), bwd.end(), [](char c) { return c != 0; });
}

double edge_travel_time(const RoadSegment& seg, int occupancy) {
    const double free_time = seg.length_m / seg.free_speed;
    return occupancy >= seg.jam_threshold ? seg.length_m / (seg.free_speed / seg.jam_factor) : free_time;
}

TrafficState::TrafficState(const RoadNetwork& net)
    : on_(net.segment_count()), jammed_(net.segment_count(), 0) {
    thresholds_.reserve(net.segment_count());
    for (const RoadSegment& s : net.segments()) thresholds_.push_back(s.jam_threshold);
}

std::vector<SegmentId> TrafficState::jammed_segments() const {
    std::vector<SegmentId> out;
    for (std::size_t i = 0; i < jammed_.size(); ++i) {
        if (jammed_[i]) out.push_back(static_cast<SegmentId>(i));
    }
    return out;
}

TrafficState::Update TrafficState::enter(SegmentId s, int vehicle) {
    auto& on = on_.at(static_cast<std::size_t>(s));
    if (std::find(on.begin(), on.end(), vehicle) != on.end()) {
        throw ProtocolError("vehicle " + std::to_string(vehicle) + " entered segment " + std::to_string(s) + " twice");
    }
    on.push_back(vehicle);
    ++total_;
    const bool now_jammed = static_cast<int>(on.size()) >= thresholds_[static_cast<std::size_t>(s)];
    Update u{now_jammed ? RoadState::Jammed : RoadState::Free, false};
    if (now_jammed != (jammed_[static_cast<std::size_t>(s)] != 0)) {
        jammed_[static_cast<std::size_t>(s)] = now_jammed ? 1 : 0;
        ++jam_version_;
        u.changed = true;
    }
    return u;
}

TrafficState::Update TrafficState::leave(SegmentId s, int vehicle) {
    auto& on = on_.at(static_cast<std::size_t>(s));
    auto it = std::find(on.begin(), on.end(), vehicle);
    if (it == on.end()) {
        throw ProtocolError("vehicle " + std::to_string(vehicle) + " left segment " + std::to_string(s) +
                            " without entering it");
    }
    on.erase(it);
    --total_;
    const bool now_jammed = static_cast<int>(on.size()) >= thresholds_[static_cast<std::size_t>(s)];
    Update u{now_jammed ? RoadState::Jammed : RoadState::Free, false};
    if (now_jammed != (jammed_[static_cast<std::size_t>(s)] != 0)) {
        jammed_[static_cast<std::size_t>(s)] = now_jammed ? 1 : 0;
        ++jam_version_;
        u.changed = true;
    }
    return u;
}

double segment_cost(const RoadSegment& seg, const TrafficState& traffic, PathPolicy policy) {
    if (policy == PathPolicy::ShortestDistance) return seg.length_m;
    return edge_travel_time(seg, traffic.occupancy(seg.id));
}

double route_length(const RoadNetwork& net, const Route& route) {
    double total = 0.0;
    for (SegmentId s : route.segments) total += net.segment(s).length_m;
    return total;
}

double route_time(const RoadNetwork& net, const TrafficState& traffic, const Route& route) {
    double total = 0.0;
    for (SegmentId s : route.segments) total += edge_travel_time(net.segment(s), traffic.occupancy(s));
    return total;
}

bool RouteTree::reachable(NodeId from) const {
    return std::isfinite(cost.at(static_cast<std::size_t>(from)));
}

Route RouteTree::route_from(const RoadNetwork& net, NodeId from) const {
    if (!reachable(from)) throw NoPathError("no route from node " + std::to_string(from));
    Route r;
    r.origin = from;
    r.destination = destination;
    NodeId u = from;
    while (u != destination) {
        const SegmentId s = next[static_cast<std::size_t>(u)];
        r.segments.push_back(s);
        u = net.segment(s).to;
    }
    return r;
}

RouteTree build_route_tree(const RoadNetwork& net, const TrafficState& traffic, NodeId destination,
                           PathPolicy policy, const std::vector<char>& excluded_mask) {
    const std::size_t n = net.node_count();
    auto excluded = [&](SegmentId s) {
        return !excluded_mask.empty() && excluded_mask[static_cast<std::size_t>(s)] != 0;
    };

    RouteTree tree;
    tree.destination = destination;
    tree.cost.assign(n, kInf);
    tree.time.assign(n, kInf);
    tree.next.assign(n, kNoSegment);

    std::vector<char> done(n, 0);
    std::vector<NodeId> order;
    order.reserve(n);
    MinQueue pq;
    tree.cost[static_cast<std::size_t>(destination)] = 0.0;
    pq.emplace(0.0, destination);
    while (!pq.empty()) {
        const auto [d, v] = pq.top();
        pq.pop();
        if (done[static_cast<std::size_t>(v)]) continue;
        done[static_cast<std::size_t>(v)] = 1;
        order.push_back(v);
        for (SegmentId s : net.in_segments(v)) {
            if (excluded(s)) continue;
            const RoadSegment& seg = net.segment(s);
            const double cand = segment_cost(seg, traffic, policy) + d;
            if (cand < tree.cost[static_cast<std::size_t>(seg.from)]) {
                tree.cost[static_cast<std::size_t>(seg.from)] = cand;
                pq.emplace(cand, seg.from);
            }
        }
    }

    // Greedy lexicographic successor: the smallest-id tight out-segment.
    tree.time[static_cast<std::size_t>(destination)] = 0.0;
    for (NodeId u : order) {
        if (u == destination) continue;
        const double cu = tree.cost[static_cast<std::size_t>(u)];
        SegmentId best = kNoSegment;
        for (SegmentId s : net.out_segments(u)) {
            if (excluded(s)) continue;
            const RoadSegment& seg = net.segment(s);
            const double cv = tree.cost[static_cast<std::size_t>(seg.to)];
            if (!std::isfinite(cv)) continue;
            if (segment_cost(seg, traffic, policy) + cv == cu && (best == kNoSegment || s < best)) best = s;
        }
        tree.next[static_cast<std::size_t>(u)] = best;
        const RoadSegment& seg = net.segment(best);
        tree.time[static_cast<std::size_t>(u)] =
            movement_time(seg, traffic.occupancy(best)) + tree.time[static_cast<std::size_t>(seg.to)];
    }
    return tree;
}

Route plan_route(const RoadNetwork& net, const TrafficState& traffic, NodeId from, NodeId to, PathPolicy policy,
                 std::span<const SegmentId> excluded) {
    if (!net.valid_node(from) || !net.valid_node(to)) throw std::out_of_range("plan_route: unknown node");
    std::vector<char> mask;
    if (!excluded.empty()) {
        mask.assign(net.segment_count(), 0);
        for (SegmentId s : excluded) mask.at(static_cast<std::size_t>(s)) = 1;
    }
    if (from == to) return Route{from, to, {}};
    const RouteTree tree = build_route_tree(net, traffic, to, policy, mask);
    if (!tree.reachable(from)) {
        throw NoPathError("no path from " + std::to_string(from) + " to " + std::to_string(to) +
                          " avoiding excluded segments");
    }
    return tree.route_from(net, from);
}

std::vector<double> travel_times_from(const RoadNetwork& net, const TrafficState& traffic, NodeId from) {
    std::vector<double> dist(net.node_count(), kInf);
    std::vector<char> done(net.node_count(), 0);
    MinQueue pq;
    dist[static_cast<std::size_t>(from)] = 0.0;
    pq.emplace(0.0, from);
    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (done[static_cast<std::size_t>(u)]) continue;
        done[static_cast<std::size_t>(u)] = 1;
        for (SegmentId s : net.out_segments(u)) {
            const RoadSegment& seg = net.segment(s);
            const double cand = d + edge_travel_time(seg, traffic.occupancy(s));
            if (cand < dist[static_cast<std::size_t>(seg.to)]) {
                dist[static_cast<std::size_t>(seg.to)] = cand;
                pq.emplace(cand, seg.to);
            }
        }
    }
    return dist;
}

NodeId nearest_stop(const RoadNetwork& net, const TrafficState& traffic, NodeId from) {
    if (net.is_stop(from)) return from;
    const auto dist = travel_times_from(net, traffic, from);
    NodeId best = kNoNode;
    for (NodeId s : net.stops()) {  // ascending ids: strict < keeps the smaller id on ties
        if (best == kNoNode || dist[static_cast<std::size_t>(s)] < dist[static_cast<std::size_t>(best)]) best = s;
    }
    return best;
}

std::vector<StationEta> nearest_station_set(const RoadNetwork& net, const TrafficState& traffic, NodeId from,
                                            std::span<const StationId> candidates) {
    const auto dist = travel_times_from(net, traffic, from);
    std::vector<StationEta> out;
    if (candidates.empty()) {
        for (const StationSite& st : net.stations()) out.push_back({st.id, dist[static_cast<std::size_t>(st.node)]});
    } else {
        for (StationId id : candidates) {
            const StationSite& st = net.stations().at(static_cast<std::size_t>(id));
            out.push_back({st.id, dist[static_cast<std::size_t>(st.node)]});
        }
    }
    std::sort(out.begin(), out.end(), [](const StationEta& a, const StationEta& b) {
        return a.eta != b.eta ? a.eta < b.eta : a.station < b.station;
    });
    return out;
}

void Router::sync(const TrafficState& traffic) {
    if (traffic.jam_version() != version_) {
        cache_.clear();
        version_ = traffic.jam_version();
    }
}

const RouteTree& Router::tree(const RoadNetwork& net, const TrafficState& traffic, NodeId to, PathPolicy policy,
                              bool avoid_jams) {
    sync(traffic);
    std::vector<char> mask;
    if (avoid_jams) {
        const auto jammed = traffic.jammed_segments();
        if (jammed.empty()) {
            avoid_jams = false;
        } else {
            mask.assign(net.segment_count(), 0);
            for (SegmentId s : jammed) mask[static_cast<std::size_t>(s)] = 1;
        }
    }
    const std::int64_t key = (static_cast<std::int64_t>(to) << 2) |
                             (policy == PathPolicy::LeastTime ? 2 : 0) | (avoid_jams ? 1 : 0);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        it = cache_.emplace(key, build_route_tree(net, traffic, to, policy, mask)).first;
    }
    return it->second;
}

Route Router::route(const RoadNetwork& net, const TrafficState& traffic, NodeId from, NodeId to,
                    PathPolicy policy) {
    if (from == to) return Route{from, to, {}};
    const RouteTree& avoiding = tree(net, traffic, to, policy, true);
    if (avoiding.reachable(from)) return avoiding.route_from(net, from);
    return tree(net, traffic, to, policy, false).route_from(net, from);
}

double Router::travel_time(const RoadNetwork& net, const TrafficState& traffic, NodeId from, NodeId to,
                           PathPolicy policy) {
    if (from == to) return 0.0;
    const RouteTree& avoiding = tree(net, traffic, to, policy, true);
    if (avoiding.reachable(from)) return avoiding.time[static_cast<std::size_t>(from)];
    return tree(net, traffic, to, policy, false).time[static_cast<std::size_t>(from)];
}

std::optional<Route> Router::route_excluding(const RoadNetwork& net, const TrafficState& traffic, NodeId from,
                                             NodeId to, PathPolicy policy, std::span<const SegmentId> excluded) {
    try {
        return plan_route(net, traffic, from, to, policy, excluded);
    } catch (const NoPathError&) {
        return std::nullopt;
    }
}

}  // namespace etaxi
