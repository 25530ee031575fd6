#include "etaxi/fleet.hpp"

#include "etaxi/errors.hpp"

#include <algorithm>

namespace etaxi {

const char* to_string(TaxiRole r) { return r == TaxiRole::Taxi ? "TAXI" : "RENTAL"; }

const char* to_string(TaxiState s) {
    switch (s) {
        case TaxiState::IdleAtStop: return "IDLE_AT_STOP";
        case TaxiState::Repositioning: return "REPOSITIONING";
        case TaxiState::EnRouteToPickup: return "EN_ROUTE_TO_PICKUP";
        case TaxiState::Occupied: return "OCCUPIED";
        case TaxiState::EnRouteToStation: return "EN_ROUTE_TO_STATION";
        case TaxiState::QueuedAtStation: return "QUEUED_AT_STATION";
        case TaxiState::Charging: return "CHARGING";
        case TaxiState::ParkedAtRentalSite: return "PARKED_AT_RENTAL_SITE";
        case TaxiState::RentedOut: return "RENTED_OUT";
        case TaxiState::Retired: return "RETIRED";
    }
    return "UNKNOWN";
}

TaxiState taxi_state_from_string(const std::string& s) {
    for (int i = 0; i < kTaxiStateCount; ++i) {
        const auto st = static_cast<TaxiState>(i);
        if (s == to_string(st)) return st;
    }
    throw ConfigError("unknown taxi state: " + s);
}

bool is_idle_state(TaxiState s) {
    return s == TaxiState::IdleAtStop || s == TaxiState::Repositioning || s == TaxiState::ParkedAtRentalSite;
}

bool is_charging_state(TaxiState s) {
    return s == TaxiState::EnRouteToStation || s == TaxiState::QueuedAtStation || s == TaxiState::Charging;
}

bool legal_transition(TaxiRole role, TaxiState from, TaxiState to) {
    using S = TaxiState;
    if (role == TaxiRole::Rental) {
        return (from == S::ParkedAtRentalSite && to == S::RentedOut) ||
               (from == S::RentedOut && to == S::ParkedAtRentalSite);
    }
    switch (from) {
        case S::IdleAtStop:
            return to == S::EnRouteToPickup || to == S::EnRouteToStation || to == S::Repositioning || to == S::Retired;
        case S::Repositioning:
            return to == S::IdleAtStop || to == S::EnRouteToPickup || to == S::EnRouteToStation || to == S::Retired;
        case S::EnRouteToPickup:
            return to == S::Occupied;
        case S::Occupied:
            return to == S::EnRouteToPickup || to == S::IdleAtStop || to == S::Repositioning ||
                   to == S::EnRouteToStation || to == S::Retired;
        case S::EnRouteToStation:
            return to == S::QueuedAtStation || to == S::Charging;
        case S::QueuedAtStation:
            return to == S::Charging;
        case S::Charging:
            return to == S::IdleAtStop || to == S::Repositioning || to == S::Retired;
        case S::ParkedAtRentalSite:
        case S::RentedOut:
        case S::Retired:
            return false;
    }
    return false;
}

void BatteryModel::validate() const {
    if (!(capacity_kwh > 0.0)) throw ConfigError("battery capacity must be positive");
    if (!(drive_kwh_per_km > 0.0)) throw ConfigError("drive consumption must be positive");
    if (!(idle_kwh_per_hour > 0.0)) throw ConfigError("idle drain must be positive");
    if (!(reserve_fraction > 0.0 && reserve_fraction < 1.0)) throw ConfigError("reserve fraction must be in (0, 1)");
}

bool needs_charge(double battery_kwh, TaxiState state, const BatteryModel& model) {
    return battery_kwh <= model.reserve_kwh() && !is_charging_state(state);
}

double charge_duration(double battery_kwh, double capacity_kwh, double rate_kw) {
    return std::max(0.0, capacity_kwh - battery_kwh) / rate_kw * 3600.0;
}

double mean_full_charge_time(const BatteryModel& model, double rate_kw) {
    return charge_duration(model.reserve_kwh(), model.capacity_kwh, rate_kw);
}

double station_score(const StationInfo& s, double mean_charge_time) {
    const int free = std::max(0, s.chargers - s.in_service);
    const int waiting_ahead = s.queue_length + std::max(0, s.in_service - free);
    return s.eta + waiting_ahead * mean_charge_time;
}

StationId select_station(std::span<const StationInfo> stations, double mean_charge_time) {
    if (stations.empty()) throw ConfigError("no charging station available");
    const StationInfo* best = nullptr;
    double best_score = 0.0;
    for (const auto& s : stations) {
        const double score = station_score(s, mean_charge_time);
        if (!best || score < best_score || (score == best_score && s.id < best->id)) {
            best = &s;
            best_score = score;
        }
    }
    return best->id;
}

}  // namespace etaxi
