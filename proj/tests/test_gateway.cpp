#include "doctest.h"

#include "etaxi/errors.hpp"
#include "etaxi/gateway.hpp"
#include "fixtures.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <chrono>
#include <set>
#include <thread>

using namespace etaxi;
using json = nlohmann::json;

namespace {

ScenarioConfig short_default(double horizon = 3600.0) {
    auto cfg = fixture::default_scenario();
    cfg.horizon = horizon;
    return cfg;
}

Command now(CommandKind k) {
    Command c;
    c.kind = k;
    c.now = true;
    return c;
}

Command step_until(double t) {
    Command c = now(CommandKind::StepUntil);
    c.value = t;
    return c;
}

struct Collector {
    std::mutex mu;
    std::vector<std::string> msgs;
    Sink sink() {
        return [this](std::shared_ptr<const std::string> m) {
            std::lock_guard lk(mu);
            msgs.push_back(*m);
        };
    }
};

}  // namespace

TEST_CASE("step-until moves an unpaced run and pauses it") {
    RunOptions opts;
    opts.ratio = 0.0;
    Run run("r", short_default(), opts);
    CHECK(run.clock() == 0.0);
    const Command applied = run.control(step_until(900.0));
    CHECK(applied.now == false);
    CHECK(applied.time > 0.0);
    CHECK(run.clock() == 900.0);
    CHECK(run.paused());
    run.control(step_until(10000.0));  // clamped at the horizon
    CHECK(run.clock() == 3600.0);
    CHECK(run.finished());
    CHECK_THROWS_AS(run.control(now(CommandKind::Resume)), CommandError);
}

TEST_CASE("pause freezes the paced clock") {
    RunOptions opts;
    opts.ratio = 60.0;
    opts.tick_ms = 1000000;  // ticks driven by the test
    Run run("r", short_default(), opts);
    run.tick(2.0);
    CHECK(run.clock() == doctest::Approx(120.0));
    run.control(now(CommandKind::Pause));
    CHECK(run.paused());
    const json before = to_json(run.snapshot());
    run.tick(30.0);
    run.tick(30.0);
    CHECK(to_json(run.snapshot()) == before);
    run.control(now(CommandKind::Resume));
    const double t = run.clock();
    run.tick(1.0);
    CHECK(run.clock() == doctest::Approx(t + 60.0));
}

TEST_CASE("live stream equals the replay of the command log") {
    const auto cfg = short_default(7200.0);
    RunOptions opts;
    opts.ratio = 0.0;
    Run run("r", cfg, opts);
    Collector got;
    run.subscribe(got.sink());

    run.control(step_until(500.0));
    Command grow = now(CommandKind::SetFleetSize);
    grow.count = 14;
    run.control(grow);
    run.control(step_until(1800.0));
    Command pol = now(CommandKind::SetPolicy);
    pol.policy.carpool = true;
    pol.policy.path_policy = PathPolicy::LeastTime;
    run.control(pol);
    Command rate = now(CommandKind::SetGenerationRate);
    rate.value = 2.0;
    run.control(rate);
    run.control(step_until(4000.0));
    Command shrink = now(CommandKind::SetStationCount);
    shrink.count = 2;
    run.control(shrink);
    run.control(step_until(7200.0));

    const auto log = run.command_log();
    for (const auto& c : log) CHECK_FALSE(c.now);
    const auto replay = replay_stream(cfg, log, run.clock());
    REQUIRE(got.msgs.size() == replay.size());
    CHECK(got.msgs == replay);

    std::set<std::string> kinds;
    for (const auto& m : got.msgs) kinds.insert(json::parse(m).at("kind").get<std::string>());
    CHECK(kinds.count("snapshot"));
    CHECK(kinds.count("command_applied"));

    Simulation headless(cfg);
    headless.run_until(cfg.horizon, log);
    CHECK(to_json(headless.metrics()) == to_json(run.metrics()));
    CHECK(to_json(headless.snapshot()) == to_json(run.snapshot()));
}

TEST_CASE("force-assign through the control surface") {
    auto city = fixture::small_city({{0, 0}, {1000, 0}}, {{0, 1, 1000.0}}, {0.0, 1.0});
    auto cfg = fixture::tiny(city, 1, 50.0, 1000.0);
    cfg.dispatch_interval = 100.0;
    RunOptions opts;
    opts.ratio = 0.0;
    Run run("r", cfg, opts);
    run.control(step_until(60.0));

    Command c = now(CommandKind::ForceAssign);
    c.request = 1;
    c.taxi = 0;
    run.control(c);
    const auto snap = run.snapshot();
    for (const auto& r : snap.pending) {
        if (r.id == 1) CHECK(r.status == "ASSIGNED");
        if (r.id == 0) CHECK(r.status == "WAITING");
    }
    CHECK(snap.taxis.at(0).state == "EN_ROUTE_TO_PICKUP");

    Command busy = c;
    busy.request = 0;
    CHECK_THROWS_AS(run.control(busy), TargetError);
}

TEST_CASE("request routing and error replies") {
    RunManager runs;
    json body{{"config", to_json(short_default())}, {"ratio", 0.0}};
    auto r = handle_request(runs, "POST", "/runs", body.dump());
    REQUIRE(r.status == 201);
    const std::string id = r.body.at("run_id");
    const std::string base = "/runs/" + id;

    CHECK(handle_request(runs, "GET", "/runs", "").body.at("runs") == json::array({id}));
    CHECK(handle_request(runs, "GET", base, "").body.at("time") == 0.0);

    r = handle_request(runs, "POST", base + "/commands", R"({"kind":"StepUntil","until":600})");
    CHECK(r.status == 200);
    CHECK(r.body.at("time") == 600.0);
    CHECK(handle_request(runs, "GET", base + "/snapshot", "").body.at("time") == 600.0);
    CHECK(handle_request(runs, "GET", base + "/metrics", "").status == 200);
    const auto log = handle_request(runs, "GET", base + "/log", "");
    CHECK(log.status == 200);
    CHECK(log_from_json(log.body).size() == 1);

    SUBCASE("unknown run") {
        r = handle_request(runs, "GET", "/runs/nope/snapshot", "");
        CHECK(r.status == 404);
        CHECK(r.body.at("error") == "NotFound");
        CHECK(handle_request(runs, "POST", "/runs/nope/commands", "{}").status == 404);
        CHECK(handle_request(runs, "DELETE", "/runs/nope", "").status == 404);
    }
    SUBCASE("malformed command") {
        r = handle_request(runs, "POST", base + "/commands", R"({"kind":"SetFleetSize","count":"x"})");
        CHECK(r.status == 400);
        CHECK(r.body.at("error") == "CommandError");
        CHECK(r.body.at("reason").get<std::string>().find("count") != std::string::npos);
        CHECK(handle_request(runs, "POST", base + "/commands", "{").status == 400);
        CHECK(handle_request(runs, "POST", base + "/commands", R"({"kind":"Warp"})").status == 400);
    }
    SUBCASE("command in the past") {
        r = handle_request(runs, "POST", base + "/commands", R"({"kind":"Pause","time":10})");
        CHECK(r.status == 400);
        CHECK(r.body.at("error") == "CommandError");
    }
    SUBCASE("target in the wrong state") {
        r = handle_request(runs, "POST", base + "/commands", R"({"kind":"ForceAssign","request":0,"taxi":999})");
        CHECK(r.status == 422);
        CHECK(r.body.at("error") == "TargetError");
    }
    SUBCASE("bad config") {
        json bad = to_json(short_default());
        bad["fleet_size"] = 0;
        r = handle_request(runs, "POST", "/runs", bad.dump());
        CHECK(r.status == 400);
        CHECK(r.body.at("error") == "ConfigError");
    }
    SUBCASE("delete") {
        CHECK(handle_request(runs, "DELETE", base, "").status == 200);
        CHECK(handle_request(runs, "GET", base, "").status == 404);
    }
    CHECK(handle_request(runs, "PUT", "/runs", "").status == 405);
    CHECK(handle_request(runs, "GET", "/elsewhere", "").status == 404);
}

TEST_CASE("paced run reaches its horizon") {
    RunOptions opts;
    opts.ratio = 36000.0;
    opts.tick_ms = 5;
    Run run("r", short_default(), opts);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(30);
    while (!run.finished() && std::chrono::steady_clock::now() < deadline)
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    CHECK(run.finished());
    CHECK(run.clock() == 3600.0);
}

// --- over the wire ---------------------------------------------------------------

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct Client {
    net::io_context ioc;
    unsigned short port;

    std::pair<int, json> call(http::verb verb, const std::string& target, const std::string& body = "") {
        tcp::resolver resolver(ioc);
        beast::tcp_stream stream(ioc);
        stream.connect(resolver.resolve("127.0.0.1", std::to_string(port)));
        http::request<http::string_body> req{verb, target, 11};
        req.set(http::field::host, "127.0.0.1");
        req.set(http::field::content_type, "application/json");
        req.body() = body;
        req.prepare_payload();
        http::write(stream, req);
        beast::flat_buffer buf;
        http::response<http::string_body> res;
        http::read(stream, buf, res);
        beast::error_code ec;
        stream.socket().shutdown(tcp::socket::shutdown_both, ec);
        return {static_cast<int>(res.result_int()), json::parse(res.body())};
    }
};

}  // namespace

TEST_CASE("HTTP and WebSocket over a socket") {
    RunManager runs;
    GatewayServer server(runs, "127.0.0.1", 0, 2);
    REQUIRE(server.port() != 0);
    Client client{{}, server.port()};

    json body{{"config", to_json(short_default())}, {"ratio", 0.0}};
    auto [status, created] = client.call(http::verb::post, "/runs", body.dump());
    REQUIRE(status == 201);
    const std::string id = created.at("run_id");

    tcp::resolver resolver(client.ioc);
    websocket::stream<tcp::socket> ws(client.ioc);
    net::connect(ws.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
    ws.handshake("127.0.0.1", "/runs/" + id + "/stream");

    beast::flat_buffer buf;
    ws.read(buf);
    const json first = json::parse(beast::buffers_to_string(buf.data()));
    CHECK(first.at("kind") == "snapshot");
    CHECK(first.at("payload").at("time") == 0.0);
    buf.consume(buf.size());

    auto [s2, applied] = client.call(http::verb::post, "/runs/" + id + "/commands", R"({"kind":"StepUntil","until":400})");
    CHECK(s2 == 200);
    CHECK(applied.at("command").at("kind") == "StepUntil");

    // command_applied comes first (applied at the stamp), then the 60 s samples up to 400
    std::vector<json> msgs;
    while (msgs.empty() || msgs.back().at("payload").at("time").get<double>() < 360.0) {
        ws.read(buf);
        msgs.push_back(json::parse(beast::buffers_to_string(buf.data())));
        buf.consume(buf.size());
    }
    CHECK(msgs.front().at("kind") == "command_applied");
    CHECK(msgs.front().at("payload").at("accepted") == true);
    int samples = 0;
    for (const auto& m : msgs) samples += m.at("kind") == "snapshot";
    CHECK(samples == 6);

    auto [s3, snap] = client.call(http::verb::get, "/runs/" + id + "/snapshot");
    CHECK(s3 == 200);
    CHECK(snap.at("time") == 400.0);
    auto [s4, log] = client.call(http::verb::get, "/runs/" + id + "/log");
    CHECK(s4 == 200);
    CHECK(log.size() == 1);
    auto [s5, err] = client.call(http::verb::get, "/runs/missing/log");
    CHECK(s5 == 404);
    CHECK(err.at("error") == "NotFound");

    SUBCASE("stream for an unknown run is refused") {
        websocket::stream<tcp::socket> bad(client.ioc);
        net::connect(bad.next_layer(), resolver.resolve("127.0.0.1", std::to_string(server.port())));
        CHECK_THROWS(bad.handshake("127.0.0.1", "/runs/missing/stream"));
    }

    beast::error_code ec;
    ws.close(websocket::close_code::normal, ec);
    server.stop();
}
