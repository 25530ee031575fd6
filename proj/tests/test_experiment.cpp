#include "doctest.h"
#include "etaxi/errors.hpp"
#include "etaxi/experiment.hpp"
#include "etaxi/simulation.hpp"
#include "fixtures.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

using namespace etaxi;

namespace {

SweepSpec fleet_spec(int replications) {
    SweepSpec s;
    s.name = "unit";
    s.base = fixture::default_scenario();
    s.base.horizon = 7200.0;
    s.axis = SweepAxis::Fleet;
    for (int f = 5; f <= 20; ++f) s.values.push_back(f);
    s.replications = replications;
    return s;
}

// Builds a row CSV by hand: one row per (variant, size, seed), metric given
// by fn, arrival hash by hash_fn.
template <class Fn, class HashFn>
std::string synthetic(const std::vector<std::string>& variants, const std::vector<int>& sizes, int seeds, Fn fn,
                      HashFn hash_fn) {
    std::ostringstream o;
    o << "variant,axis,axis_value,replication,seed,passenger_avg_wait,taxi_avg_idle,arrival_hash\n";
    for (const auto& v : variants)
        for (int x : sizes)
            for (int s = 1; s <= seeds; ++s)
                o << v << ",fleet," << x << ',' << s - 1 << ',' << s << ',' << fn(v, x, s) << ',' << 100 + x << ','
                  << hash_fn(v, x, s) << '\n';
    return o.str();
}

std::vector<int> sizes_5_20() {
    std::vector<int> v;
    for (int x = 5; x <= 20; ++x) v.push_back(x);
    return v;
}

Expectation ordering(const std::string& a, const std::string& b, bool lower) {
    Expectation e;
    e.name = "ordering";
    e.kind = ExpectationKind::Ordering;
    e.metric = "passenger_avg_wait";
    e.a = a;
    e.b = b;
    e.b_lower = lower;
    return e;
}

}  // namespace

TEST_CASE("sweep rows and CSV") {
    auto spec = fleet_spec(1);
    const auto r = run_sweep(spec);
    CHECK(r.rows.size() == 16);
    CHECK_FALSE(r.tainted);
    for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(r.rows[i].axis_value == 5 + static_cast<int>(i));

    const std::string csv = rows_csv(r);
    const auto t = CsvTable::parse(csv);
    CHECK(t.header() == kRowColumns);
    CHECK(t.size() == 16);

    SUBCASE("byte-identical on rerun and across thread counts") {
        CHECK(rows_csv(run_sweep(spec)) == csv);
        spec.jobs = 3;
        CHECK(rows_csv(run_sweep(spec)) == csv);
    }
    SUBCASE("all cells share the demand draw of their seed") {
        for (const auto& row : r.rows) CHECK(row.arrival_hash == r.rows.front().arrival_hash);
    }
}

TEST_CASE("aggregate means and intervals") {
    auto spec = fleet_spec(3);
    spec.values = {8, 12};
    const auto r = run_sweep(spec);
    REQUIRE(r.rows.size() == 6);
    const auto agg = CsvTable::parse(aggregate_csv(r));
    REQUIRE(agg.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
        double sum = 0, sq = 0;
        for (std::size_t i = 3 * k; i < 3 * k + 3; ++i) sum += r.rows[i].report.passenger_avg_wait;
        const double mean = sum / 3.0;
        for (std::size_t i = 3 * k; i < 3 * k + 3; ++i)
            sq += (r.rows[i].report.passenger_avg_wait - mean) * (r.rows[i].report.passenger_avg_wait - mean);
        CHECK(agg.number(k, "passenger_avg_wait_mean") == doctest::Approx(mean).epsilon(1e-12));
        CHECK(agg.number(k, "passenger_avg_wait_ci95") == doctest::Approx(1.96 * std::sqrt(sq / 2.0) / std::sqrt(3.0)));
        CHECK(agg.number(k, "replications") == 3);
    }
}

TEST_CASE("sweep spec files") {
    for (const char* name : {"fleet", "stations", "policies"}) {
        CAPTURE(name);
        const auto s = load_sweep(std::string(ETAXI_SOURCE_DIR) + "/sweeps/" + name + ".json");
        CHECK_NOTHROW(s.validate());
        CHECK(s.seed_list().size() == 10);
    }
    const auto p = load_sweep(std::string(ETAXI_SOURCE_DIR) + "/sweeps/policies.json");
    REQUIRE(p.variant_list().size() == 4);
    const auto carsharing = p.cell(p.variant_list()[3], 9, 4);
    CHECK(carsharing.fleet_size == 9);
    CHECK(carsharing.seed == 4);
    CHECK(carsharing.policy.carsharing);
    CHECK(carsharing.policy.carpool);
    CHECK(carsharing.policy.path_policy == PathPolicy::LeastTime);
    CHECK(carsharing.station_count == 5);

    auto bad = nlohmann::json::parse(R"({"name": "x", "axis": "fleet", "values": []})");
    CHECK_THROWS_AS(sweep_from_json(bad).validate(), SpecError);
    bad = nlohmann::json::parse(R"({"name": "x", "axis": "colour", "values": [1]})");
    CHECK_THROWS_AS(sweep_from_json(bad), SpecError);
}

TEST_CASE("trend checks on synthetic tables") {
    const auto sizes = sizes_5_20();
    auto same_hash = [](const std::string&, int, int s) { return 1000 + s; };

    SUBCASE("monotone") {
        const auto csv = synthetic({"base"}, sizes, 2, [](const std::string&, int x, int s) { return 500.0 / x + s; },
                                   same_hash);
        Expectation e;
        e.kind = ExpectationKind::Monotone;
        e.metric = "passenger_avg_wait";
        e.rho_bound = -0.9;
        auto v = check_trends(CsvTable::parse(csv), {e});
        REQUIRE(v.size() == 1);
        CHECK(v[0].pass);
        CHECK(v[0].value == doctest::Approx(-1.0));
        e.increasing = true;
        e.rho_bound = 0.9;
        CHECK_FALSE(check_trends(CsvTable::parse(csv), {e})[0].pass);
    }
    SUBCASE("ordering counts agreeing sizes") {
        // b is lower than a except at sizes 7 and 12
        const auto csv = synthetic({"a", "b"}, sizes, 2,
                                   [](const std::string& v, int x, int) {
                                       const bool flip = x == 7 || x == 12;
                                       return v == "a" ? 300.0 : (flip ? 310.0 : 290.0);
                                   },
                                   same_hash);
        auto e = ordering("a", "b", true);
        e.min_fraction = 0.75;
        auto v = check_trends(CsvTable::parse(csv), {e});
        CHECK(v[0].pass);
        CHECK(v[0].value == 14);
        e.min_count = 15;
        CHECK_FALSE(check_trends(CsvTable::parse(csv), {e})[0].pass);
    }
    SUBCASE("convergence window") {
        const std::vector<double> curve{900, 700, 520, 400, 320, 280, 262, 255, 252, 251, 250, 250, 250, 250, 250, 250};
        const auto csv = synthetic({"base"}, sizes, 1,
                                   [&](const std::string&, int x, int) { return curve[static_cast<std::size_t>(x - 5)]; },
                                   same_hash);
        Expectation e;
        e.kind = ExpectationKind::Convergence;
        e.metric = "passenger_avg_wait";
        e.eps = 0.05;
        e.window_lo = 9;
        e.window_hi = 13;
        // drops: .22 .26 .23 .2 .125 .064 .027 ... first size after the last drop >= 5% is 11
        auto v = check_trends(CsvTable::parse(csv), {e});
        CHECK(v[0].value == 11);
        CHECK(v[0].pass);
        e.window_hi = 10;
        CHECK_FALSE(check_trends(CsvTable::parse(csv), {e})[0].pass);
    }
    SUBCASE("missing metric column") {
        const auto csv = synthetic({"base"}, sizes, 1, [](const std::string&, int, int) { return 1.0; }, same_hash);
        Expectation e;
        e.metric = "taxi_avg_queue_wait";
        CHECK_THROWS_AS(check_trends(CsvTable::parse(csv), {e}), SpecError);
        CHECK_THROWS_AS(CsvTable::parse(csv).column("nope"), SpecError);
    }
    SUBCASE("unpaired arms are refused") {
        const auto csv = synthetic({"a", "b"}, sizes, 2, [](const std::string&, int, int) { return 1.0; },
                                   [](const std::string& v, int x, int s) { return v == "b" && x == 9 ? 7 : 1000 + s; });
        CHECK_THROWS_AS(check_trends(CsvTable::parse(csv), {ordering("a", "b", true)}), PairingError);
    }
    SUBCASE("an arm against itself has no strict ordering") {
        const auto csv = synthetic({"a"}, sizes, 2, [](const std::string&, int x, int) { return 1.0 * x; }, same_hash);
        auto e = ordering("a", "a", true);
        e.min_count = 1;
        const auto v = check_trends(CsvTable::parse(csv), {e});
        CHECK_FALSE(v[0].pass);
        CHECK(v[0].value == 0);
    }
}

TEST_CASE("expectation files parse") {
    for (const char* name : {"fleet", "stations", "policies"}) {
        CAPTURE(name);
        std::ifstream in(std::string(ETAXI_SOURCE_DIR) + "/expectations/" + name + ".json");
        REQUIRE(in);
        CHECK_FALSE(expectations_from_json(nlohmann::json::parse(in)).empty());
    }
    CHECK_THROWS_AS(expectations_from_json(nlohmann::json::parse(R"([{"kind": "ordering", "metric": "wait",
        "a": "x", "b": "y", "direction": "sideways", "min_count": 1}])")),
                    SpecError);
}

TEST_CASE("calibrated defaults put the fleet knee in its window") {
    auto spec = fleet_spec(10);
    spec.base = fixture::default_scenario();
    spec.base.station_count = 8;
    const auto rows = CsvTable::parse(rows_csv(run_sweep(spec)));
    Expectation e;
    e.kind = ExpectationKind::Convergence;
    e.metric = "passenger_avg_wait";
    e.window_lo = 9;
    e.window_hi = 13;
    const auto v = check_trends(rows, {e});
    CHECK(v[0].pass);
    const int knee = static_cast<int>(v[0].value);

    SUBCASE("doubling demand moves the knee to a larger fleet") {
        auto heavy = spec;
        heavy.base.demand.base_mean_interarrival /= 2.0;
        heavy.base.demand.interarrival_stddev /= 2.0;
        const auto hv = check_trends(CsvTable::parse(rows_csv(run_sweep(heavy))), {e});
        CHECK(hv[0].value > knee);
    }
}

TEST_CASE("a default run is fast") {
    const auto start = std::chrono::steady_clock::now();
    const auto m = run_scenario(fixture::default_scenario());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(m.requests > 0);
    CHECK(secs < 60.0);
}
