#include "doctest.h"
#include "etaxi/demand.hpp"
#include "etaxi/errors.hpp"
#include "etaxi/events.hpp"
#include "etaxi/fleet.hpp"
#include "etaxi/rng.hpp"

#include <cmath>
#include <map>

using namespace etaxi;

TEST_CASE("rng streams are independent and reproducible") {
    RngStreams a(42), b(42);
    for (int i = 0; i < 100; ++i) a.get(StreamId::DemandTiming).next_u64();
    std::vector<std::uint64_t> xa, xb;
    for (int i = 0; i < 50; ++i) {
        xa.push_back(a.get(StreamId::DemandOd).next_u64());
        xb.push_back(b.get(StreamId::DemandOd).next_u64());
    }
    CHECK(xa == xb);

    RngStreams c(43);
    CHECK(c.get(StreamId::DemandOd).next_u64() != RngStreams(42).get(StreamId::DemandOd).next_u64());
    CHECK(RngStreams::stream_seed(42, "demand-timing") != RngStreams::stream_seed(42, "demand-od"));
}

TEST_CASE("rng transforms stay in range") {
    RngStream s(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = s.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(s.uniform_index(9) < 9u);
    }
    CHECK(s.draws() == 20000u);
}

TEST_CASE("event queue orders by time then scheduling order") {
    EventQueue q;
    q.schedule(10.0, EventKind::MetricsSample, 1);
    q.schedule(5.0, EventKind::MetricsSample, 2);
    q.schedule(5.0, EventKind::DispatchTick, 3);
    q.schedule(0.0, EventKind::PassengerArrival, 4);
    std::vector<int> order;
    while (!q.empty()) order.push_back(q.pop().subject);
    CHECK(order == std::vector<int>{4, 2, 3, 1});
    CHECK(q.now() == 10.0);

    q.schedule(10.0, EventKind::MetricsSample, 5);
    q.schedule(20.0, EventKind::MetricsSample, 6);
    CHECK(q.pop().subject == 5);
    CHECK_THROWS_AS(q.schedule(9.0, EventKind::MetricsSample), SchedulingError);
    CHECK_THROWS_AS(q.advance_to(5.0), SchedulingError);
}

TEST_CASE("interarrival draws") {
    DemandProfile p;
    p.base_mean_interarrival = 120.0;
    p.interarrival_stddev = 0.0;
    RngStream rng(1);
    for (int i = 0; i < 10; ++i) CHECK(next_interarrival(p, 0.0, rng) == 120.0);

    // floor applies to negative draws
    p.base_mean_interarrival = 2.0;
    p.interarrival_stddev = 50.0;
    p.min_interarrival = 1.0;
    int at_floor = 0;
    for (int i = 0; i < 2000; ++i) {
        const double d = next_interarrival(p, 0.0, rng);
        CHECK(d >= 1.0);
        at_floor += d == 1.0;
    }
    CHECK(at_floor > 500);

    SUBCASE("rush hour mean matches the clamped normal") {
        DemandProfile r;
        r.base_mean_interarrival = 120.0;
        r.interarrival_stddev = 40.0;
        r.schedule.push_back({0.0, 4.0});
        // E[max(X, 1)] for X ~ N(30, 10)
        const double mu = 30.0, sd = 10.0, a = 1.0;
        const double z = (a - mu) / sd;
        const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
        const double expected = a * cdf + mu * (1.0 - cdf) + sd * phi;
        RngStream g(99);
        double sum = 0.0;
        for (int i = 0; i < 10000; ++i) sum += next_interarrival(r, 100.0, g);
        CHECK(std::fabs(sum / 10000.0 - expected) < 0.05 * expected);
    }
}

TEST_CASE("rate schedule replacement") {
    DemandProfile p;
    p.schedule = {{0.0, 2.0}, {100.0, 3.0}, {200.0, 5.0}};
    CHECK(p.multiplier_at(50.0) == 2.0);
    CHECK(p.multiplier_at(150.0) == 3.0);
    p.replace_from(120.0, 4.0);
    CHECK(p.multiplier_at(119.0) == 3.0);
    CHECK(p.multiplier_at(120.0) == 4.0);
    CHECK(p.multiplier_at(1e6) == 4.0);

    DemandProfile bad;
    bad.schedule = {{0.0, 0.0}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("arrival counting over one hour") {
    DemandProfile p;
    p.base_mean_interarrival = 120.0;
    p.interarrival_stddev = 40.0;
    const double bound = 3.0 * std::sqrt(30.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RngStreams rng(seed);
        int n = 0;
        for (double t = 0.0; t < 3600.0; t += next_interarrival(p, t, rng.get(StreamId::DemandTiming))) ++n;
        CHECK(std::fabs(n - 30.0) <= bound);
    }
}

namespace {

CitySpec two_town_line() {
    CitySpec s;
    s.nodes = {{0, 0.0, 0.0, 0}, {1, 100.0, 0.0, 0}};
    RoadSegment a;
    a.from = 0;
    a.to = 1;
    a.length_m = 100.0;
    a.free_speed = 10.0;
    RoadSegment b = a;
    b.from = 1;
    b.to = 0;
    s.segments = {a, b};
    Town t1;
    t1.id = 1;
    t1.nodes = {0};
    t1.demand_weight = 0.0;
    Town t2;
    t2.id = 2;
    t2.nodes = {1};
    t2.demand_weight = 1.0;
    s.towns = {t1, t2};
    return s;
}

}  // namespace

TEST_CASE("origin-destination sampling") {
    SUBCASE("degenerate weights") {
        RoadNetwork net = build_city(two_town_line());
        RngStream rng(5);
        for (int i = 0; i < 200; ++i) {
            const auto [o, d] = sample_od(net, rng);
            CHECK(o == 1);
            CHECK(d == 0);
        }
    }
    SUBCASE("uniform towns pass a chi-square test") {
        CitySpec spec = eight_towns_spec();
        spec.downtown_weight = 1.0;
        RoadNetwork net = build_city(spec);
        RngStream rng(11);
        std::map<TownId, int> counts;
        const int n = 10000;
        for (int i = 0; i < n; ++i) {
            const auto [o, d] = sample_od(net, rng);
            CHECK(o != d);
            ++counts[net.town_of(o)];
        }
        REQUIRE(counts.size() == 9);
        double chi2 = 0.0;
        const double e = n / 9.0;
        for (const auto& [town, c] : counts) chi2 += (c - e) * (c - e) / e;
        CHECK(chi2 < 20.09);  // chi-square 0.99 quantile, 8 degrees of freedom
    }
    SUBCASE("downtown share follows its weight") {
        RoadNetwork net = build_city(eight_towns_spec());
        TownId downtown = 0;
        for (const auto& t : net.towns())
            if (t.demand_weight == 3.0) downtown = t.id;
        REQUIRE(downtown != 0);
        RngStream rng(12);
        const int n = 10000;
        int hits = 0;
        for (int i = 0; i < n; ++i) hits += net.town_of(sample_od(net, rng).first) == downtown;
        const double p = 3.0 / 11.0;
        CHECK(std::fabs(hits - n * p) <= 3.0 * std::sqrt(n * p * (1 - p)));
    }
}

TEST_CASE("request status lattice") {
    using S = RequestStatus;
    CHECK(legal_request_transition(S::Waiting, S::Assigned));
    CHECK(legal_request_transition(S::Assigned, S::Aboard));
    CHECK(legal_request_transition(S::Aboard, S::Delivered));
    CHECK(legal_request_transition(S::Waiting, S::RentalTrip));
    CHECK(legal_request_transition(S::RentalTrip, S::Delivered));
    CHECK(legal_request_transition(S::Waiting, S::Cancelled));
    CHECK_FALSE(legal_request_transition(S::Aboard, S::Waiting));
    CHECK_FALSE(legal_request_transition(S::Assigned, S::Cancelled));
    CHECK_FALSE(legal_request_transition(S::Delivered, S::Aboard));
    RideRequest r;
    CHECK(r.party_size == 1);
    CHECK(r.status == S::Waiting);
}

TEST_CASE("battery arithmetic") {
    BatteryModel m;
    CHECK(m.drive_energy(1000.0) == doctest::Approx(0.2));
    CHECK(m.idle_energy(1800.0) == doctest::Approx(0.2));
    CHECK(charge_duration(10.0, 40.0, 50.0) == doctest::Approx(2160.0));
    CHECK(charge_duration(40.0, 40.0, 50.0) == 0.0);

    CHECK(needs_charge(0.15 * 40.0, TaxiState::IdleAtStop, m));
    CHECK(needs_charge(0.20 * 40.0, TaxiState::IdleAtStop, m));
    CHECK_FALSE(needs_charge(0.21 * 40.0, TaxiState::IdleAtStop, m));
    CHECK_FALSE(needs_charge(0.05 * 40.0, TaxiState::Charging, m));
    CHECK_FALSE(needs_charge(0.05 * 40.0, TaxiState::QueuedAtStation, m));
    CHECK_FALSE(needs_charge(0.05 * 40.0, TaxiState::EnRouteToStation, m));

    BatteryModel bad;
    bad.reserve_fraction = 1.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("station selection") {
    std::vector<StationInfo> s{{0, 100.0, 0, 0, 1}, {1, 50.0, 2, 1, 1}};
    CHECK(station_score(s[0], 300.0) == 100.0);
    CHECK(station_score(s[1], 300.0) == doctest::Approx(50.0 + 3 * 300.0));
    s[1].in_service = 0;
    CHECK(station_score(s[1], 300.0) == doctest::Approx(650.0));
    CHECK(select_station(s, 300.0) == 0);

    std::vector<StationInfo> empty_all{{0, 80.0, 0, 0, 1}, {1, 40.0, 0, 0, 1}, {2, 60.0, 0, 0, 1}};
    CHECK(select_station(empty_all, 300.0) == 1);

    std::vector<StationInfo> same{{3, 40.0, 1, 1, 2}, {5, 40.0, 1, 1, 2}};
    CHECK(select_station(same, 300.0) == 3);
    CHECK_THROWS_AS(select_station(std::vector<StationInfo>{}, 300.0), ConfigError);
}

TEST_CASE("taxi transition graph") {
    using S = TaxiState;
    CHECK(legal_transition(TaxiRole::Taxi, S::IdleAtStop, S::EnRouteToPickup));
    CHECK(legal_transition(TaxiRole::Taxi, S::Repositioning, S::EnRouteToPickup));
    CHECK(legal_transition(TaxiRole::Taxi, S::EnRouteToStation, S::QueuedAtStation));
    CHECK(legal_transition(TaxiRole::Taxi, S::QueuedAtStation, S::Charging));
    CHECK_FALSE(legal_transition(TaxiRole::Taxi, S::QueuedAtStation, S::IdleAtStop));
    CHECK_FALSE(legal_transition(TaxiRole::Taxi, S::Retired, S::IdleAtStop));
    CHECK(legal_transition(TaxiRole::Rental, S::ParkedAtRentalSite, S::RentedOut));
    CHECK(legal_transition(TaxiRole::Rental, S::RentedOut, S::ParkedAtRentalSite));
    for (S to : {S::EnRouteToPickup, S::Occupied, S::EnRouteToStation, S::IdleAtStop})
        CHECK_FALSE(legal_transition(TaxiRole::Rental, S::ParkedAtRentalSite, to));
    CHECK(is_idle_state(S::Repositioning));
    CHECK(is_idle_state(S::ParkedAtRentalSite));
    CHECK_FALSE(is_idle_state(S::Charging));
    CHECK(taxi_state_from_string(to_string(S::QueuedAtStation)) == S::QueuedAtStation);
}
