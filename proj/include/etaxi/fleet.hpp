#pragma once

#include "etaxi/city.hpp"
#include "etaxi/demand.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace etaxi {

enum class TaxiRole { Taxi, Rental };

// REPOSITIONING is the empty drive to a stand-by stop after a dropoff or a
// reroute; it counts as idle and the taxi can be dispatched from it.
enum class TaxiState {
    IdleAtStop,
    Repositioning,
    EnRouteToPickup,
    Occupied,
    EnRouteToStation,
    QueuedAtStation,
    Charging,
    ParkedAtRentalSite,
    RentedOut,
    Retired,
};
inline constexpr int kTaxiStateCount = 10;

const char* to_string(TaxiRole r);
const char* to_string(TaxiState s);
TaxiState taxi_state_from_string(const std::string& s);

bool is_idle_state(TaxiState s);      // stop waiting, repositioning, rental parked
bool is_charging_state(TaxiState s);  // to-station, queued, charging
bool legal_transition(TaxiRole role, TaxiState from, TaxiState to);

struct BatteryModel {
    double capacity_kwh = 40.0;
    double drive_kwh_per_km = 0.2;
    double idle_kwh_per_hour = 0.4;
    double reserve_fraction = 0.2;

    double drive_energy(double meters) const { return drive_kwh_per_km * meters / 1000.0; }
    double idle_energy(double seconds) const { return idle_kwh_per_hour * seconds / 3600.0; }
    double reserve_kwh() const { return reserve_fraction * capacity_kwh; }
    void validate() const;  // ConfigError
};

bool needs_charge(double battery_kwh, TaxiState state, const BatteryModel& model);

// Seconds to charge from battery_kwh to full at rate_kw.
double charge_duration(double battery_kwh, double capacity_kwh, double rate_kw);

// Mean time of one full recharge from the reserve level.
double mean_full_charge_time(const BatteryModel& model, double rate_kw);

struct StationInfo {
    StationId id = 0;
    double eta = 0.0;  // LEAST_TIME seconds from the taxi
    int queue_length = 0;
    int in_service = 0;
    int chargers = 1;
};

double station_score(const StationInfo& s, double mean_charge_time);
// argmin score, ties to the smaller id. Throws ConfigError on an empty list.
StationId select_station(std::span<const StationInfo> stations, double mean_charge_time);

enum class StopKind { Pickup, Dropoff };

struct PlanStop {
    NodeId node = kNoNode;
    RequestId request = kNone;
    StopKind kind = StopKind::Pickup;
    friend bool operator==(const PlanStop&, const PlanStop&) = default;
};

struct Taxi {
    TaxiId id = kNone;
    TaxiRole role = TaxiRole::Taxi;
    TaxiState state = TaxiState::IdleAtStop;
    bool retiring = false;
    bool stranded = false;
    int seats = 4;

    // Position: at `node` when segment == kNoSegment, otherwise traversing
    // `segment` (from `node`).
    NodeId node = kNoNode;
    SegmentId segment = kNoSegment;
    double seg_progress = 0.0;     // fraction done at seg_mark
    double seg_mark = 0.0;         // time of the last progress update
    double seg_arrival = 0.0;      // scheduled arrival at the segment end
    bool seg_jammed = false;       // jam state the arrival was computed with
    std::uint64_t move_token = 0;  // invalidates superseded arrival events

    std::vector<SegmentId> route;  // segments still to enter after the current one
    NodeId target = kNoNode;
    PathPolicy course_policy = PathPolicy::ShortestDistance;

    double battery_kwh = 0.0;
    double capacity_kwh = 0.0;
    double battery_mark = 0.0;  // stationary drain is settled lazily from here

    std::vector<RequestId> onboard;
    std::vector<PlanStop> plan;
    StationId station = -1;

    double spawned_at = 0.0;
    double state_since = 0.0;
    std::array<double, kTaxiStateCount> time_in_state{};

    bool moving() const noexcept { return segment != kNoSegment; }
};

}  // namespace etaxi
