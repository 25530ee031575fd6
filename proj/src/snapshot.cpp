#include "etaxi/snapshot.hpp"

#include "etaxi/errors.hpp"

namespace etaxi {

using nlohmann::json;

json to_json(const MetricsReport& m) {
    json j{{"horizon", m.horizon},
           {"passenger_avg_wait", m.passenger_avg_wait},
           {"taxi_avg_idle", m.taxi_avg_idle},
           {"taxi_avg_queue_wait", m.taxi_avg_queue_wait},
           {"taxi_avg_idle_incl_charging", m.taxi_avg_idle_incl_charging},
           {"requests", m.requests},
           {"deliveries", m.deliveries},
           {"pickups", m.pickups},
           {"cancelled", m.cancelled},
           {"charge_visits", m.charge_visits},
           {"pooled_rides", m.pooled_rides},
           {"rental_trips", m.rental_trips},
           {"stranded", m.stranded},
           {"vehicles", m.vehicles},
           {"waits_counted", m.waits_counted},
           {"seed", m.seed},
           {"config_hash", m.config_hash}};
    json series = json::array();
    for (const auto& p : m.series)
        series.push_back({{"time", p.time},
                          {"passenger_avg_wait", p.passenger_avg_wait},
                          {"taxi_avg_idle", p.taxi_avg_idle},
                          {"taxi_avg_queue_wait", p.taxi_avg_queue_wait}});
    j["series"] = series;
    return j;
}

MetricsReport metrics_from_json(const json& j) {
    MetricsReport m;
    m.horizon = j.at("horizon").get<double>();
    m.passenger_avg_wait = j.at("passenger_avg_wait").get<double>();
    m.taxi_avg_idle = j.at("taxi_avg_idle").get<double>();
    m.taxi_avg_queue_wait = j.at("taxi_avg_queue_wait").get<double>();
    m.taxi_avg_idle_incl_charging = j.at("taxi_avg_idle_incl_charging").get<double>();
    m.requests = j.at("requests").get<int>();
    m.deliveries = j.at("deliveries").get<int>();
    m.pickups = j.at("pickups").get<int>();
    m.cancelled = j.at("cancelled").get<int>();
    m.charge_visits = j.at("charge_visits").get<int>();
    m.pooled_rides = j.at("pooled_rides").get<int>();
    m.rental_trips = j.at("rental_trips").get<int>();
    m.stranded = j.at("stranded").get<int>();
    m.vehicles = j.at("vehicles").get<int>();
    m.waits_counted = j.at("waits_counted").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& p : j.at("series"))
        m.series.push_back({p.at("time").get<double>(), p.at("passenger_avg_wait").get<double>(),
                            p.at("taxi_avg_idle").get<double>(), p.at("taxi_avg_queue_wait").get<double>()});
    return m;
}

json to_json(const NegotiationPrompt& p) {
    json j{{"id", p.id},
           {"request", p.request},
           {"issued_at", p.issued_at},
           {"timeout", p.timeout},
           {"deadline", p.issued_at + p.timeout},
           {"options", {"KEEP_WAITING", "OFFER_CARPOOL", "CANCEL_REQUEST"}},
           {"default_choice", to_string(p.default_choice)},
           {"resolved", p.resolved},
           {"by_timeout", p.by_timeout}};
    if (p.resolved) j["resolution"] = to_string(p.resolution);
    return j;
}

NegotiationPrompt prompt_from_json(const json& j) {
    NegotiationPrompt p;
    p.id = j.at("id").get<int>();
    p.request = j.at("request").get<int>();
    p.issued_at = j.at("issued_at").get<double>();
    p.timeout = j.at("timeout").get<double>();
    p.default_choice = negotiation_choice_from_string(j.at("default_choice").get<std::string>());
    p.resolved = j.at("resolved").get<bool>();
    p.by_timeout = j.at("by_timeout").get<bool>();
    if (p.resolved) p.resolution = negotiation_choice_from_string(j.at("resolution").get<std::string>());
    return p;
}

namespace {

json plan_json(const std::vector<PlanStop>& plan) {
    json arr = json::array();
    for (const auto& s : plan)
        arr.push_back({{"node", s.node}, {"request", s.request},
                       {"kind", s.kind == StopKind::Pickup ? "PICKUP" : "DROPOFF"}});
    return arr;
}

std::vector<PlanStop> plan_from(const json& arr) {
    std::vector<PlanStop> out;
    for (const auto& s : arr)
        out.push_back({s.at("node").get<int>(), s.at("request").get<int>(),
                       s.at("kind").get<std::string>() == "PICKUP" ? StopKind::Pickup : StopKind::Dropoff});
    return out;
}

}  // namespace

json to_json(const SimSnapshot& s) {
    json taxis = json::array();
    for (const auto& t : s.taxis)
        taxis.push_back({{"id", t.id},
                         {"role", t.role},
                         {"state", t.state},
                         {"node", t.node},
                         {"segment", t.segment},
                         {"progress", t.progress},
                         {"x", t.x},
                         {"y", t.y},
                         {"battery_kwh", t.battery_kwh},
                         {"onboard", t.onboard},
                         {"plan", plan_json(t.plan)},
                         {"route", t.route},
                         {"target", t.target},
                         {"station", t.station},
                         {"retiring", t.retiring},
                         {"stranded", t.stranded}});
    json stations = json::array();
    for (const auto& st : s.stations)
        stations.push_back({{"id", st.id},
                            {"node", st.node},
                            {"active", st.active},
                            {"chargers", st.chargers},
                            {"state", st.state},
                            {"queue", st.queue},
                            {"in_service", st.in_service}});
    json roads = json::array();
    for (const auto& r : s.roads) roads.push_back({{"id", r.id}, {"occupancy", r.occupancy}, {"jammed", r.jammed}});
    json pending = json::array();
    for (const auto& r : s.pending)
        pending.push_back({{"id", r.id},
                           {"call_time", r.call_time},
                           {"origin", r.origin},
                           {"dest", r.dest},
                           {"status", r.status},
                           {"taxi", r.taxi}});
    json prompts = json::array();
    for (const auto& p : s.prompts) prompts.push_back(to_json(p));
    return json{{"time", s.time},       {"taxis", taxis},     {"stations", stations}, {"roads", roads},
                {"pending", pending},   {"prompts", prompts}, {"metrics", to_json(s.metrics)}};
}

SimSnapshot snapshot_from_json(const json& j) {
    SimSnapshot s;
    try {
        s.time = j.at("time").get<double>();
        for (const auto& t : j.at("taxis")) {
            TaxiView v;
            v.id = t.at("id").get<int>();
            v.role = t.at("role").get<std::string>();
            v.state = t.at("state").get<std::string>();
            v.node = t.at("node").get<int>();
            v.segment = t.at("segment").get<int>();
            v.progress = t.at("progress").get<double>();
            v.x = t.at("x").get<double>();
            v.y = t.at("y").get<double>();
            v.battery_kwh = t.at("battery_kwh").get<double>();
            v.onboard = t.at("onboard").get<std::vector<int>>();
            v.plan = plan_from(t.at("plan"));
            v.route = t.at("route").get<std::vector<int>>();
            v.target = t.at("target").get<int>();
            v.station = t.at("station").get<int>();
            v.retiring = t.at("retiring").get<bool>();
            v.stranded = t.at("stranded").get<bool>();
            s.taxis.push_back(std::move(v));
        }
        for (const auto& st : j.at("stations")) {
            StationView v;
            v.id = st.at("id").get<int>();
            v.node = st.at("node").get<int>();
            v.active = st.at("active").get<bool>();
            v.chargers = st.at("chargers").get<int>();
            v.state = st.at("state").get<std::string>();
            v.queue = st.at("queue").get<std::vector<int>>();
            v.in_service = st.at("in_service").get<std::vector<int>>();
            s.stations.push_back(std::move(v));
        }
        for (const auto& r : j.at("roads"))
            s.roads.push_back({r.at("id").get<int>(), r.at("occupancy").get<int>(), r.at("jammed").get<bool>()});
        for (const auto& r : j.at("pending"))
            s.pending.push_back({r.at("id").get<int>(), r.at("call_time").get<double>(), r.at("origin").get<int>(),
                                 r.at("dest").get<int>(), r.at("status").get<std::string>(), r.at("taxi").get<int>()});
        for (const auto& p : j.at("prompts")) s.prompts.push_back(prompt_from_json(p));
        s.metrics = metrics_from_json(j.at("metrics"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed snapshot: ") + e.what());
    }
    return s;
}

}  // namespace etaxi
