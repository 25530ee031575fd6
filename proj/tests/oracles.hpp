#pragma once

// Brute-force reference implementations used by unit and acceptance tests.

#include "etaxi/city.hpp"
#include "etaxi/dispatch.hpp"
#include "etaxi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

struct PathOptimum {
    bool found = false;
    double cost = std::numeric_limits<double>::infinity();
    std::vector<etaxi::SegmentId> best;  // lexicographically smallest among exact-cost minima
};

// Enumerates every simple path from `from` to `to` that avoids `excluded`.
inline PathOptimum enumerate_paths(const etaxi::RoadNetwork& net, const etaxi::TrafficState& traffic,
                                   etaxi::NodeId from, etaxi::NodeId to, etaxi::PathPolicy policy,
                                   const std::vector<etaxi::SegmentId>& excluded) {
    PathOptimum out;
    if (from == to) {
        out.found = true;
        out.cost = 0.0;
        return out;
    }
    std::vector<char> visited(net.node_count(), 0);
    std::vector<etaxi::SegmentId> path;
    auto dfs = [&](auto&& self, etaxi::NodeId u, double cost) -> void {
        if (u == to) {
            if (!out.found || cost < out.cost || (cost == out.cost && path < out.best)) {
                out.found = true;
                out.cost = cost;
                out.best = path;
            }
            return;
        }
        visited[static_cast<std::size_t>(u)] = 1;
        for (const auto& seg : net.segments()) {
            if (seg.from != u || visited[static_cast<std::size_t>(seg.to)]) continue;
            if (std::find(excluded.begin(), excluded.end(), seg.id) != excluded.end()) continue;
            path.push_back(seg.id);
            self(self, seg.to, cost + etaxi::segment_cost(seg, traffic, policy));
            path.pop_back();
        }
        visited[static_cast<std::size_t>(u)] = 0;
    };
    dfs(dfs, from, 0.0);
    return out;
}

struct RandomGraph {
    etaxi::RoadNetwork net;
    etaxi::TrafficState traffic;
};

// Strongly connected random graph on 2..8 nodes with integer lengths, a few
// distinct speeds and random occupancies (some segments jammed).
inline RandomGraph random_graph(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> n_dist(2, 8);
    const int n = n_dist(gen);
    etaxi::CitySpec spec;
    for (int i = 0; i < n; ++i) spec.nodes.push_back({i, 100.0 * i, 0.0, 0});
    std::uniform_int_distribution<int> len(1, 6);
    const double speeds[] = {5.0, 10.0, 20.0};
    std::uniform_int_distribution<int> sp(0, 2);
    auto add = [&](int a, int b) {
        etaxi::RoadSegment s;
        s.from = a;
        s.to = b;
        s.length_m = 100.0 * len(gen);
        s.free_speed = speeds[sp(gen)];
        s.jam_threshold = 2;
        s.jam_factor = 3.0;
        spec.segments.push_back(s);
    };
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::shuffle(perm.begin(), perm.end(), gen);
    for (int i = 0; i < n; ++i) add(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>((i + 1) % n)]);
    std::uniform_int_distribution<int> extra(0, n * 2);
    std::uniform_int_distribution<int> node(0, n - 1);
    for (int k = extra(gen); k > 0; --k) {
        const int a = node(gen), b = node(gen);
        if (a != b) add(a, b);
    }
    RandomGraph g{etaxi::build_city(spec), {}};
    g.traffic = etaxi::TrafficState(g.net);
    std::uniform_int_distribution<int> occ(0, 2);
    int vehicle = 0;
    for (const auto& s : g.net.segments()) {
        for (int k = occ(gen); k > 0; --k) g.traffic.enter(s.id, vehicle++);
    }
    return g;
}

inline bool costs_equal(double a, double b) {
    return std::fabs(a - b) <= 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
}

// Car-pool reference: every interleaving of the newcomer's pickup p and
// dropoff d (p < d) into the host's stop list, walked stop by stop.
struct PoolPick {
    etaxi::TaxiId taxi = etaxi::kNone;
    std::size_t p = 0;  // positions in the new plan
    std::size_t d = 0;
    double added = 0.0;
};

struct PoolRider {
    double direct = 0.0;
    double scale = 1.0;
    double picked_at = 0.0;  // when aboard
    bool aboard = false;
    double deadline = std::numeric_limits<double>::infinity();
};

// Returns the plan's end time, or nullopt if a constraint breaks.
// `new_pickup` receives the newcomer's pickup time.
template <typename Travel>
std::optional<double> walk_plan(const etaxi::PoolHost& h, const std::vector<etaxi::PlanStop>& plan,
                                const std::map<etaxi::RequestId, PoolRider>& riders, Travel&& travel, double alpha,
                                double* new_pickup, etaxi::RequestId newcomer) {
    double t = h.start_time;
    etaxi::NodeId at = h.start_node;
    int load = h.onboard;
    std::map<etaxi::RequestId, double> up;
    for (const auto& s : plan) {
        if (s.node != at) t += travel(at, s.node);
        at = s.node;
        const PoolRider& r = riders.at(s.request);
        if (s.kind == etaxi::StopKind::Pickup) {
            load += 1;
            if (load > h.seats) return std::nullopt;
            up[s.request] = t;
            if (s.request == newcomer) {
                if (new_pickup) *new_pickup = t;
            } else if (t > r.deadline) {
                return std::nullopt;
            }
        } else {
            load -= 1;
            const double start = up.count(s.request) ? up[s.request] : r.picked_at;
            if (t - start > r.scale * alpha * r.direct) return std::nullopt;
        }
    }
    return t;
}

template <typename Travel>
std::optional<PoolPick> brute_force_pool(const etaxi::PoolRequest& req, const std::vector<etaxi::PoolHost>& hosts,
                                         std::map<etaxi::RequestId, PoolRider> riders, Travel&& travel, double now,
                                         double alpha, double threshold) {
    riders[req.id] = PoolRider{req.direct_time, req.detour_scale, 0.0, false,
                               std::numeric_limits<double>::infinity()};
    std::optional<PoolPick> best;
    for (const auto& h : hosts) {
        if (h.onboard >= h.seats) continue;
        auto base = walk_plan(h, h.plan, riders, travel, alpha, nullptr, req.id);
        if (!base) continue;
        const std::size_t n = h.plan.size() + 2;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t d = p + 1; d < n; ++d) {
                std::vector<etaxi::PlanStop> plan;
                std::size_t k = 0;
                for (std::size_t pos = 0; pos < n; ++pos) {
                    if (pos == p) plan.push_back({req.origin, req.id, etaxi::StopKind::Pickup});
                    else if (pos == d) plan.push_back({req.dest, req.id, etaxi::StopKind::Dropoff});
                    else plan.push_back(h.plan[k++]);
                }
                double pick = 0.0;
                auto end = walk_plan(h, plan, riders, travel, alpha, &pick, req.id);
                if (!end || pick - now > threshold) continue;
                const double added = *end - *base;
                if (!best || added < best->added || (added == best->added && h.taxi < best->taxi))
                    best = PoolPick{h.taxi, p, d, added};
            }
        }
    }
    return best;
}

// plan_route against enumerate_paths on `graphs` random graphs, every node
// pair, both policies, random exclusion sets. Returns the mismatch count.
inline int routing_trial(std::uint64_t seed, int graphs) {
    using namespace etaxi;
    std::mt19937_64 gen(seed);
    int mismatches = 0;
    for (int g = 0; g < graphs; ++g) {
        auto graph = random_graph(gen);
        const auto& net = graph.net;
        std::bernoulli_distribution drop(0.2);
        std::vector<SegmentId> excluded;
        for (const auto& s : net.segments())
            if (drop(gen)) excluded.push_back(s.id);
        for (PathPolicy p : {PathPolicy::ShortestDistance, PathPolicy::LeastTime}) {
            for (NodeId a = 0; a < static_cast<NodeId>(net.node_count()); ++a) {
                for (NodeId b = 0; b < static_cast<NodeId>(net.node_count()); ++b) {
                    const auto best = enumerate_paths(net, graph.traffic, a, b, p, excluded);
                    try {
                        const Route r = plan_route(net, graph.traffic, a, b, p, excluded);
                        double cost = 0.0;
                        for (SegmentId s : r.segments) cost += segment_cost(net.segment(s), graph.traffic, p);
                        if (!best.found || !costs_equal(cost, best.cost)) ++mismatches;
                        if (p == PathPolicy::ShortestDistance && best.found && r.segments != best.best) ++mismatches;
                    } catch (const NoPathError&) {
                        if (best.found) ++mismatches;
                    }
                }
            }
        }
    }
    return mismatches;
}

struct Pts {
    std::vector<std::pair<double, double>> xy;
    double operator()(etaxi::NodeId a, etaxi::NodeId b) const {
        const auto [ax, ay] = xy[static_cast<std::size_t>(a)];
        const auto [bx, by] = xy[static_cast<std::size_t>(b)];
        return std::round(std::hypot(ax - bx, ay - by));
    }
};

inline etaxi::PassengerLookup lookup_from(const std::map<etaxi::RequestId, PoolRider>& riders) {
    return [&riders](etaxi::RequestId id) {
        const auto& r = riders.at(id);
        return etaxi::PoolPassenger{r.direct, r.scale, r.picked_at, r.aboard, r.deadline};
    };
}

struct PoolTrial {
    int mismatches = 0;
    int matched = 0;  // instances where both found a host
};

// carpool_match against brute_force_pool on random instances: 1..3 hosts,
// each with at most 3 remaining stops, on 6 points with Euclidean times.
inline PoolTrial pool_trial(std::uint64_t seed, int instances) {
    using namespace etaxi;
    PoolTrial out;
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> coord(0.0, 600.0);
    std::uniform_int_distribution<int> nhosts(1, 3);
    std::uniform_real_distribution<double> alpha_d(1.0, 2.5);
    for (int inst = 0; inst < instances; ++inst) {
        Pts pts;
        const int nodes = 6;
        for (int i = 0; i < nodes; ++i) pts.xy.emplace_back(std::round(coord(gen)), std::round(coord(gen)));
        std::uniform_int_distribution<int> node(0, nodes - 1);
        auto distinct = [&](NodeId a) {
            NodeId b = node(gen);
            while (b == a) b = node(gen);
            return b;
        };
        const double now = 1000.0;
        const double alpha = alpha_d(gen);
        const double threshold = std::uniform_real_distribution<double>(100.0, 800.0)(gen);
        std::map<RequestId, PoolRider> riders;
        std::vector<PoolHost> hosts;
        RequestId next_id = 0;
        const int h_count = nhosts(gen);
        for (int hi = 0; hi < h_count; ++hi) {
            PoolHost h;
            h.taxi = hi * 3 + static_cast<int>(gen() % 3);
            h.start_node = node(gen);
            h.start_time = now + static_cast<double>(gen() % 60);
            h.seats = 1 + static_cast<int>(gen() % 4);
            const int stops_left = 1 + static_cast<int>(gen() % 3);
            // one assigned pair if room, the rest onboard dropoffs
            const bool pair = stops_left >= 2 && gen() % 2 == 0;
            const int onboard = std::min<int>(stops_left - (pair ? 2 : 0), h.seats);
            std::vector<PlanStop> drops;
            for (int k = 0; k < onboard; ++k) {
                const RequestId id = next_id++;
                const NodeId o = node(gen), d = distinct(o);
                riders[id] = {pts(o, d), 1.0, now - static_cast<double>(gen() % 300), true, 1e18};
                drops.push_back({d, id, StopKind::Dropoff});
            }
            h.onboard = onboard;
            h.plan = drops;
            if (pair) {
                const RequestId id = next_id++;
                const NodeId o = node(gen), d = distinct(o);
                riders[id] = {pts(o, d), 1.0, 0.0, false, now + 100.0 + static_cast<double>(gen() % 500)};
                const std::size_t pi = gen() % (h.plan.size() + 1);
                h.plan.insert(h.plan.begin() + static_cast<std::ptrdiff_t>(pi), {o, id, StopKind::Pickup});
                const std::size_t di = pi + 1 + gen() % (h.plan.size() - pi);
                h.plan.insert(h.plan.begin() + static_cast<std::ptrdiff_t>(di), {d, id, StopKind::Dropoff});
            }
            hosts.push_back(h);
        }
        const NodeId o = node(gen), d = distinct(o);
        PoolRequest req{next_id, o, d, pts(o, d), gen() % 4 == 0 ? 2.0 : 1.0};
        TravelTimeFn travel = [&](NodeId a, NodeId b) { return pts(a, b); };
        auto got = carpool_match(req, hosts, lookup_from(riders), travel, now, alpha, threshold);
        auto want = brute_force_pool(req, hosts, riders, pts, now, alpha, threshold);
        bool same = got.has_value() == want.has_value();
        if (same && got) {
            same = got->taxi == want->taxi && got->pickup_index == want->p && got->dropoff_index + 1 == want->d &&
                   got->added_time == want->added;
            ++out.matched;
        }
        if (!same) ++out.mismatches;
    }
    return out;
}

}  // namespace oracle
