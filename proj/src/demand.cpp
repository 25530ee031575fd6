#include "etaxi/demand.hpp"

#include "etaxi/errors.hpp"

#include <algorithm>
#include <cmath>

namespace etaxi {

double DemandProfile::multiplier_at(double t) const {
    double m = 1.0;
    for (const auto& w : schedule) {
        if (w.from > t) break;
        m = w.multiplier;
    }
    return m;
}

void DemandProfile::replace_from(double t, double multiplier) {
    std::erase_if(schedule, [t](const RateWindow& w) { return w.from >= t; });
    schedule.push_back({t, multiplier});
}

void DemandProfile::validate() const {
    if (!(base_mean_interarrival > 0.0)) throw ConfigError("base_mean_interarrival must be positive");
    if (!(interarrival_stddev >= 0.0)) throw ConfigError("interarrival_stddev must be nonnegative");
    if (!(min_interarrival > 0.0)) throw ConfigError("min_interarrival must be positive");
    double last = -std::numeric_limits<double>::infinity();
    for (const auto& w : schedule) {
        if (!(w.multiplier > 0.0)) throw ConfigError("rate multipliers must be positive");
        if (w.from < last) throw ConfigError("rate schedule must be sorted by start time");
        last = w.from;
    }
}

double next_interarrival(const DemandProfile& profile, double t_now, RngStream& rng) {
    const double m = profile.multiplier_at(t_now);
    const double mean = profile.base_mean_interarrival / m;
    const double sd = profile.interarrival_stddev / m;
    // Always two draws so the stream position does not depend on sd.
    const double x = rng.normal(mean, sd);
    return std::max(x, profile.min_interarrival);
}

namespace {

NodeId draw_weighted(const std::vector<std::pair<NodeId, double>>& items, double total, RngStream& rng) {
    const double u = rng.uniform() * total;
    double acc = 0.0;
    for (const auto& [node, w] : items) {
        acc += w;
        if (u < acc) return node;
    }
    // u landed on the rounding tail; take the last positive entry
    for (auto it = items.rbegin(); it != items.rend(); ++it)
        if (it->second > 0.0) return it->first;
    return items.back().first;
}

}  // namespace

std::pair<NodeId, NodeId> sample_od(const RoadNetwork& net, RngStream& rng) {
    if (net.stops().size() < 2) throw ConfigError("demand needs at least two stops");
    std::vector<std::pair<TownId, double>> towns;
    double total = 0.0;
    for (const auto& t : net.towns()) {
        if (t.stops.empty() || t.demand_weight <= 0.0) continue;
        towns.emplace_back(t.id, t.demand_weight);
        total += t.demand_weight;
    }
    if (towns.empty()) throw ConfigError("all town demand weights are zero");

    const TownId origin_town = draw_weighted(towns, total, rng);
    const Town& ot = net.town(origin_town);
    const NodeId origin = ot.stops[rng.uniform_index(ot.stops.size())];

    std::vector<std::pair<NodeId, double>> stops;
    double stop_total = 0.0;
    for (const auto& t : net.towns()) {
        if (t.stops.empty() || t.demand_weight <= 0.0) continue;
        const double w = t.demand_weight / static_cast<double>(t.stops.size());
        for (NodeId s : t.stops) {
            if (s == origin) continue;
            stops.emplace_back(s, w);
            stop_total += w;
        }
    }
    if (stops.empty()) {
        for (NodeId s : net.stops())
            if (s != origin) stops.emplace_back(s, 1.0);
        stop_total = static_cast<double>(stops.size());
    }
    return {origin, draw_weighted(stops, stop_total, rng)};
}

const char* to_string(RequestStatus s) {
    switch (s) {
        case RequestStatus::Waiting: return "WAITING";
        case RequestStatus::Assigned: return "ASSIGNED";
        case RequestStatus::Aboard: return "ABOARD";
        case RequestStatus::Delivered: return "DELIVERED";
        case RequestStatus::RentalTrip: return "RENTAL_TRIP";
        case RequestStatus::Cancelled: return "CANCELLED";
    }
    return "UNKNOWN";
}

bool legal_request_transition(RequestStatus from, RequestStatus to) {
    using S = RequestStatus;
    switch (from) {
        case S::Waiting: return to == S::Assigned || to == S::RentalTrip || to == S::Cancelled;
        case S::Assigned: return to == S::Aboard;
        case S::Aboard: return to == S::Delivered;
        case S::RentalTrip: return to == S::Delivered;
        case S::Delivered:
        case S::Cancelled: return false;
    }
    return false;
}

}  // namespace etaxi
