#pragma once

#include "etaxi/city.hpp"
#include "etaxi/rng.hpp"

#include <limits>
#include <utility>
#include <vector>

namespace etaxi {

using RequestId = int;
using TaxiId = int;
inline constexpr int kNone = -1;

struct RateWindow {
    double from = 0.0;        // virtual seconds
    double multiplier = 1.0;  // scales the arrival rate
};

struct DemandProfile {
    double base_mean_interarrival = 120.0;
    double interarrival_stddev = 40.0;
    double min_interarrival = 1.0;
    std::vector<RateWindow> schedule;  // sorted by `from`; multiplier 1 before the first window

    double multiplier_at(double t) const;
    // The multiplier is m from t onward; later windows are dropped.
    void replace_from(double t, double multiplier);
    void validate() const;  // ConfigError
};

// Normal(mean/m, stddev/m) truncated below at min_interarrival, m = multiplier(t_now).
double next_interarrival(const DemandProfile& profile, double t_now, RngStream& rng);

// Origin: town by demand weight, then a uniform stop in it. Destination is
// drawn from the same stop distribution conditioned on differing from the
// origin; when every other stop has zero weight it is uniform over them.
std::pair<NodeId, NodeId> sample_od(const RoadNetwork& net, RngStream& rng);

enum class RequestStatus { Waiting, Assigned, Aboard, Delivered, RentalTrip, Cancelled };
const char* to_string(RequestStatus s);

struct RideRequest {
    RequestId id = kNone;
    double call_time = 0.0;
    NodeId origin = kNoNode;
    NodeId dest = kNoNode;
    int party_size = 1;
    RequestStatus status = RequestStatus::Waiting;
    TaxiId assigned_taxi = kNone;
    double pickup_time = std::numeric_limits<double>::quiet_NaN();
    double dropoff_time = std::numeric_limits<double>::quiet_NaN();
    double pickup_deadline = std::numeric_limits<double>::infinity();  // set on assignment
    double direct_time = 0.0;    // LEAST_TIME origin->dest at call time
    double detour_scale = 1.0;   // 2 after an accepted carpool offer
    bool rental = false;
    bool pooled = false;
};

// Forward-only status lattice: Waiting->Assigned->Aboard->Delivered,
// Waiting->RentalTrip->Delivered, Waiting->Cancelled.
bool legal_request_transition(RequestStatus from, RequestStatus to);

}  // namespace etaxi
