#pragma once

#include "etaxi/city.hpp"
#include "etaxi/demand.hpp"
#include "etaxi/fleet.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace etaxi {

struct PolicyConfig {
    PathPolicy path_policy = PathPolicy::ShortestDistance;
    bool carpool = false;
    bool carsharing = false;
    double rental_fraction = 0.2;
    double carpool_detour_factor = 1.5;        // alpha
    double negotiation_wait_threshold = 600.0;  // seconds

    void validate() const;  // ConfigError
};

// (taxi_count, rental_count). Without car-sharing every vehicle is a taxi.
std::pair<int, int> split_fleet(int fleet_size, double rental_fraction, bool carsharing);

enum class DispatchOutcome { Assigned, Pooled, RentalTrip, Queued };
const char* to_string(DispatchOutcome o);

// --- car-pool insertion -------------------------------------------------

struct PoolHost {
    TaxiId taxi = kNone;
    NodeId start_node = kNoNode;  // next node the taxi reaches
    double start_time = 0.0;      // when it reaches start_node
    int onboard = 0;
    int seats = 4;
    std::vector<PlanStop> plan;
};

struct PoolPassenger {
    double direct_time = 0.0;
    double detour_scale = 1.0;
    double pickup_time = 0.0;  // meaningful when aboard
    bool aboard = false;
    // Latest pickup this passenger was promised; later insertions must keep it.
    double pickup_deadline = std::numeric_limits<double>::infinity();
};

struct PoolRequest {
    RequestId id = kNone;
    NodeId origin = kNoNode;
    NodeId dest = kNoNode;
    double direct_time = 0.0;
    double detour_scale = 1.0;
};

struct PoolMatch {
    TaxiId taxi = kNone;
    std::size_t pickup_index = 0;   // pickup inserted before old stop i
    std::size_t dropoff_index = 0;  // dropoff inserted before old stop j, j >= i
    double added_time = 0.0;
    std::vector<PlanStop> plan;
};

using TravelTimeFn = std::function<double(NodeId, NodeId)>;
using PassengerLookup = std::function<PoolPassenger(RequestId)>;

// Plan with pickup/dropoff of `req` inserted at (i, j) in old-stop indices.
std::vector<PlanStop> insert_stops(const std::vector<PlanStop>& plan, const PoolRequest& req, std::size_t i,
                                   std::size_t j);

struct PlanProjection {
    bool feasible = false;
    double end_time = 0.0;
    double new_pickup_time = 0.0;
};

// Walks the plan from the host's start, checking seat load and every
// passenger's ride time against scale * alpha * direct time.
PlanProjection project_plan(const PoolHost& host, const std::vector<PlanStop>& plan, const PassengerLookup& lookup,
                            const PoolRequest* newcomer, const TravelTimeFn& travel, double alpha);

// Best feasible insertion over all hosts: minimum added completion time, ties
// to the smaller taxi id, then the smaller (i, j). The newcomer's pickup must
// happen within wait_threshold seconds of `now`.
std::optional<PoolMatch> carpool_match(const PoolRequest& req, std::span<const PoolHost> hosts,
                                       const PassengerLookup& lookup, const TravelTimeFn& travel, double now,
                                       double alpha, double wait_threshold);

// --- car-sharing --------------------------------------------------------

// Parked rental cars per site, in rental_sites order.
struct RentalInventory {
    std::vector<NodeId> sites;
    std::vector<int> parked;
    int rented_out = 0;

    int at(NodeId site) const;
    int fleet() const;
};

bool rental_available(const RideRequest& req, const RentalInventory& inv, bool carsharing);
// Throws InventoryError if no car is parked at the origin.
void start_rental(const RideRequest& req, RentalInventory& inv);
void end_rental(NodeId site, RentalInventory& inv);

}  // namespace etaxi
