#include "etaxi/dispatch.hpp"

#include "etaxi/errors.hpp"

#include <algorithm>
#include <cmath>

namespace etaxi {

void PolicyConfig::validate() const {
    if (!(rental_fraction >= 0.0 && rental_fraction < 1.0)) throw ConfigError("rental_fraction must be in [0, 1)");
    if (!(carpool_detour_factor >= 1.0)) throw ConfigError("carpool_detour_factor must be >= 1");
    if (!(negotiation_wait_threshold >= 0.0)) throw ConfigError("negotiation_wait_threshold must be >= 0");
}

std::pair<int, int> split_fleet(int fleet_size, double rental_fraction, bool carsharing) {
    if (!carsharing) {
        if (fleet_size < 1) throw ConfigError("fleet_size must be >= 1");
        return {fleet_size, 0};
    }
    if (fleet_size < 3) throw ConfigError("car-sharing needs a fleet of at least 3");
    int rentals = static_cast<int>(std::lround(fleet_size * rental_fraction));
    rentals = std::max(rentals, 2);
    rentals = std::min(rentals, fleet_size - 1);
    return {fleet_size - rentals, rentals};
}

const char* to_string(DispatchOutcome o) {
    switch (o) {
        case DispatchOutcome::Assigned: return "ASSIGNED";
        case DispatchOutcome::Pooled: return "POOLED";
        case DispatchOutcome::RentalTrip: return "RENTAL_TRIP";
        case DispatchOutcome::Queued: return "QUEUED";
    }
    return "UNKNOWN";
}

std::vector<PlanStop> insert_stops(const std::vector<PlanStop>& plan, const PoolRequest& req, std::size_t i,
                                   std::size_t j) {
    std::vector<PlanStop> out;
    out.reserve(plan.size() + 2);
    for (std::size_t k = 0; k <= plan.size(); ++k) {
        if (k == i) out.push_back({req.origin, req.id, StopKind::Pickup});
        if (k == j) out.push_back({req.dest, req.id, StopKind::Dropoff});
        if (k < plan.size()) out.push_back(plan[k]);
    }
    return out;
}

PlanProjection project_plan(const PoolHost& host, const std::vector<PlanStop>& plan, const PassengerLookup& lookup,
                            const PoolRequest* newcomer, const TravelTimeFn& travel, double alpha) {
    PlanProjection out;
    double t = host.start_time;
    NodeId at = host.start_node;
    int load = host.onboard;
    std::unordered_map<RequestId, double> picked;
    for (const auto& stop : plan) {
        if (stop.node != at) {
            t += travel(at, stop.node);
            at = stop.node;
        }
        const bool is_new = newcomer && stop.request == newcomer->id;
        if (stop.kind == StopKind::Pickup) {
            if (++load > host.seats) return out;
            picked[stop.request] = t;
            if (is_new) out.new_pickup_time = t;
            else if (t > lookup(stop.request).pickup_deadline) return out;
            continue;
        }
        --load;
        double pickup = 0.0;
        double direct = 0.0;
        double scale = 1.0;
        if (is_new) {
            direct = newcomer->direct_time;
            scale = newcomer->detour_scale;
        } else {
            const PoolPassenger p = lookup(stop.request);
            direct = p.direct_time;
            scale = p.detour_scale;
        }
        if (auto it = picked.find(stop.request); it != picked.end()) {
            pickup = it->second;
        } else {
            pickup = lookup(stop.request).pickup_time;
        }
        if (t - pickup > scale * alpha * direct) return out;
    }
    out.feasible = true;
    out.end_time = t;
    return out;
}

std::optional<PoolMatch> carpool_match(const PoolRequest& req, std::span<const PoolHost> hosts,
                                       const PassengerLookup& lookup, const TravelTimeFn& travel, double now,
                                       double alpha, double wait_threshold) {
    std::optional<PoolMatch> best;
    for (const auto& host : hosts) {
        if (host.onboard >= host.seats) continue;
        const PlanProjection base = project_plan(host, host.plan, lookup, nullptr, travel, alpha);
        // A host already past someone's bound (traffic) takes no one else.
        if (!base.feasible) continue;
        const std::size_t m = host.plan.size();
        for (std::size_t i = 0; i <= m; ++i) {
            for (std::size_t j = i; j <= m; ++j) {
                auto plan = insert_stops(host.plan, req, i, j);
                const PlanProjection p = project_plan(host, plan, lookup, &req, travel, alpha);
                if (!p.feasible || p.new_pickup_time - now > wait_threshold) continue;
                const double added = p.end_time - base.end_time;
                const bool better = !best || added < best->added_time ||
                                    (added == best->added_time && host.taxi < best->taxi);
                if (better) best = PoolMatch{host.taxi, i, j, added, std::move(plan)};
            }
        }
    }
    return best;
}

int RentalInventory::at(NodeId site) const {
    for (std::size_t k = 0; k < sites.size(); ++k)
        if (sites[k] == site) return parked[k];
    return 0;
}

int RentalInventory::fleet() const {
    int n = rented_out;
    for (int p : parked) n += p;
    return n;
}

bool rental_available(const RideRequest& req, const RentalInventory& inv, bool carsharing) {
    if (!carsharing) return false;
    const auto is_site = [&](NodeId n) { return std::find(inv.sites.begin(), inv.sites.end(), n) != inv.sites.end(); };
    return is_site(req.origin) && is_site(req.dest) && req.origin != req.dest && inv.at(req.origin) > 0;
}

void start_rental(const RideRequest& req, RentalInventory& inv) {
    for (std::size_t k = 0; k < inv.sites.size(); ++k) {
        if (inv.sites[k] == req.origin) {
            if (inv.parked[k] <= 0) break;
            --inv.parked[k];
            ++inv.rented_out;
            return;
        }
    }
    throw InventoryError("no rental car parked at node " + std::to_string(req.origin));
}

void end_rental(NodeId site, RentalInventory& inv) {
    for (std::size_t k = 0; k < inv.sites.size(); ++k) {
        if (inv.sites[k] == site) {
            if (inv.rented_out <= 0) throw InventoryError("no rental car is out");
            ++inv.parked[k];
            --inv.rented_out;
            return;
        }
    }
    throw InventoryError("node " + std::to_string(site) + " is not a rental site");
}

}  // namespace etaxi
