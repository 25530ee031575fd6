#include "etaxi/simulation.hpp"

#include "etaxi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace etaxi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix_hash(std::uint64_t h, const void* data, std::size_t n) {
    return fnv1a64(std::string_view(static_cast<const char*>(data), n), h);
}

}  // namespace

Simulation::Simulation(const ScenarioConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {
    cfg_.validate();
    net_ = build_city(resolved_city(cfg_));
    if (net_.stops().size() < 2) throw ConfigError("the city needs at least two stops");
    traffic_ = TrafficState(net_);
    profile_ = effective_profile(cfg_);
    policy_ = cfg_.policy;

    if (static_cast<std::size_t>(cfg_.station_count) > net_.stations().size())
        throw ConfigError("station_count exceeds the number of candidate station sites");
    for (const auto& site : net_.stations()) {
        StationRuntime st;
        st.site = site;
        st.active = site.id < cfg_.station_count;
        stations_.push_back(std::move(st));
    }
    active_stations_ = cfg_.station_count;

    if (policy_.carsharing && net_.rental_sites().size() != 2)
        throw ConfigError("car-sharing needs exactly two rental sites");
    const auto [taxi_count, rental_count] = split_fleet(cfg_.fleet_size, policy_.rental_fraction, policy_.carsharing);
    rentals_configured_ = rental_count > 0;
    inventory_.sites = net_.rental_sites();
    inventory_.parked.assign(inventory_.sites.size(), 0);

    RngStream& noise = rng_.get(StreamId::ServiceNoise);
    for (int i = 0; i < taxi_count; ++i) {
        double soc = cfg_.initial_soc_max;
        if (cfg_.initial_soc_max > cfg_.initial_soc_min)
            soc = cfg_.initial_soc_min + (cfg_.initial_soc_max - cfg_.initial_soc_min) * noise.uniform();
        const auto& towns = net_.towns();
        const NodeId node = towns[spawn_cursor_++ % towns.size()].center;
        spawn_taxi(TaxiRole::Taxi, node, soc);
    }
    for (int i = 0; i < rental_count; ++i) {
        spawn_taxi(TaxiRole::Rental, inventory_.sites[static_cast<std::size_t>(i) % inventory_.sites.size()], 1.0);
    }

    queue_.schedule(0.0, EventKind::PassengerArrival);
    queue_.schedule(cfg_.metrics_interval, EventKind::MetricsSample);
    if (cfg_.dispatch_interval > 0.0) queue_.schedule(cfg_.dispatch_interval, EventKind::DispatchTick);
}

// --- bookkeeping -----------------------------------------------------------

void Simulation::record(LogKind kind, int a, int b, int c) {
    const LogRecord r{clock(), kind, a, b, c};
    log_.push_back(r);
    metrics_.add(r);
}

void Simulation::notify(Notice::Kind kind, int a, int b) {
    if (observer_) notices_.push_back({kind, clock(), a, b});
}

void Simulation::after_step() {
    if (observer_ && !notices_.empty()) {
        auto pending = std::move(notices_);
        notices_.clear();
        for (const auto& n : pending) observer_(n);
    }
    if (hook_) hook_(*this);
}

double Simulation::travel_time(NodeId from, NodeId to, PathPolicy policy) {
    return router_.travel_time(net_, traffic_, from, to, policy);
}

double Simulation::battery_now(const Taxi& t) const {
    const double dt = clock() - t.battery_mark;
    if (t.moving() || t.stranded || t.state == TaxiState::Retired) return t.battery_kwh;
    if (t.state == TaxiState::Charging) {
        const double rate = stations_[static_cast<std::size_t>(t.station)].site.charge_rate_kw;
        return std::min(t.capacity_kwh, t.battery_kwh + rate * dt / 3600.0);
    }
    return std::max(0.0, t.battery_kwh - cfg_.battery.idle_energy(dt));
}

void Simulation::settle_battery(Taxi& t) {
    t.battery_kwh = battery_now(t);
    t.battery_mark = clock();
}

std::array<double, kTaxiStateCount> Simulation::time_in_state(const Taxi& t) const {
    auto out = t.time_in_state;
    out[static_cast<std::size_t>(t.state)] += clock() - t.state_since;
    return out;
}

void Simulation::transition(Taxi& t, TaxiState to) {
    if (t.state == to) return;
    if (!legal_transition(t.role, t.state, to)) {
        throw ProtocolError("taxi " + std::to_string(t.id) + ": illegal transition " + to_string(t.state) + " -> " +
                            to_string(to));
    }
    settle_battery(t);
    t.time_in_state[static_cast<std::size_t>(t.state)] += clock() - t.state_since;
    t.state_since = clock();
    record(LogKind::TaxiState, t.id, static_cast<int>(t.state), static_cast<int>(to));
    t.state = to;
}

void Simulation::set_request_status(RideRequest& r, RequestStatus s) {
    if (!legal_request_transition(r.status, s)) {
        throw ProtocolError("request " + std::to_string(r.id) + ": illegal transition " + to_string(r.status) +
                            " -> " + to_string(s));
    }
    r.status = s;
}

void Simulation::spawn_taxi(TaxiRole role, NodeId node, double soc) {
    Taxi t;
    t.id = static_cast<TaxiId>(taxis_.size());
    t.role = role;
    t.seats = cfg_.seats;
    t.node = node;
    t.capacity_kwh = cfg_.battery.capacity_kwh;
    t.battery_kwh = t.capacity_kwh * soc;
    t.battery_mark = clock();
    t.spawned_at = clock();
    t.state_since = clock();
    t.state = role == TaxiRole::Taxi ? TaxiState::IdleAtStop : TaxiState::ParkedAtRentalSite;
    t.course_policy = policy_.path_policy;
    taxis_.push_back(t);
    record(LogKind::TaxiSpawned, t.id, static_cast<int>(role), static_cast<int>(t.state));
    if (role == TaxiRole::Rental) {
        for (std::size_t k = 0; k < inventory_.sites.size(); ++k)
            if (inventory_.sites[k] == node) ++inventory_.parked[k];
    }
}

// --- main loop ---------------------------------------------------------------

SimSnapshot Simulation::run_until(double t_end, std::span<const Command> commands) {
    for (std::size_t i = inbox_.size(); i < commands.size(); ++i) inbox_.push_back(commands[i]);
    advance(t_end);
    return snapshot();
}

void Simulation::advance(double t_end) {
    if (t_end < clock()) throw SchedulingError("run_until target precedes the clock");
    for (;;) {
        while (cursor_ < inbox_.size() && inbox_[cursor_].synthesized) ++cursor_;
        const Command* cmd = cursor_ < inbox_.size() ? &inbox_[cursor_] : nullptr;
        const double next_event = queue_.empty() ? kInf : queue_.top().time;
        if (cmd && !cmd->now && cmd->time <= t_end && cmd->time <= next_event) {
            const std::size_t index = cursor_;
            if (cmd->time < clock()) throw CommandError(index, "timestamp precedes the simulation clock");
            queue_.advance_to(cmd->time);
            try {
                apply_command(*cmd, index);
            } catch (const CommandError& e) {
                throw CommandError(index, e.reason());
            } catch (const TargetError& e) {
                throw CommandError(index, e.what());
            }
            ++cursor_;
            after_step();
            continue;
        }
        if (cmd && cmd->now) throw CommandError(cursor_, "unstamped \"now\" command in a replay log");
        if (next_event <= t_end) {
            const SimEvent ev = queue_.pop();
            ++events_processed_;
            process(ev);
            after_step();
            continue;
        }
        break;
    }
    queue_.advance_to(t_end);
}

void Simulation::process(const SimEvent& ev) {
    switch (ev.kind) {
        case EventKind::PassengerArrival: on_passenger_arrival(); break;
        case EventKind::TaxiArrivedAtNode: on_taxi_arrived(ev.subject, ev.token); break;
        case EventKind::ChargeComplete: on_charge_complete(ev.subject, ev.aux); break;
        case EventKind::JamStateChanged: on_jam_changed(ev.subject); break;
        case EventKind::DispatchTick: on_dispatch_tick(); break;
        case EventKind::NegotiationTimeout: on_negotiation_timeout(ev.subject); break;
        case EventKind::MetricsSample: on_metrics_sample(); break;
        case EventKind::CommandApplied: break;  // commands are applied from the inbox
    }
}

// --- demand ------------------------------------------------------------------

void Simulation::on_passenger_arrival() {
    const auto [origin, dest] = sample_od(net_, rng_.get(StreamId::DemandOd));
    RideRequest r;
    r.id = static_cast<RequestId>(requests_.size());
    r.call_time = clock();
    r.origin = origin;
    r.dest = dest;
    r.direct_time = travel_time(origin, dest, PathPolicy::LeastTime);
    requests_.push_back(r);
    jam_delayed_.push_back(0);

    const double t = clock();
    arrival_hash_ = mix_hash(arrival_hash_, &t, sizeof t);
    arrival_hash_ = mix_hash(arrival_hash_, &r.origin, sizeof r.origin);
    arrival_hash_ = mix_hash(arrival_hash_, &r.dest, sizeof r.dest);

    record(LogKind::RequestSpawned, r.id, origin, dest);
    queue_.schedule(clock() + next_interarrival(profile_, clock(), rng_.get(StreamId::DemandTiming)),
                    EventKind::PassengerArrival);
    if (cfg_.dispatch_interval > 0.0) incoming_.push_back(r.id);
    else handle_request(r.id);
}

void Simulation::on_dispatch_tick() {
    auto batch = std::move(incoming_);
    incoming_.clear();
    for (RequestId id : batch) handle_request(id);
    queue_.schedule(clock() + cfg_.dispatch_interval, EventKind::DispatchTick);
}

// --- dispatch ----------------------------------------------------------------

void Simulation::handle_request(RequestId id) {
    RideRequest& r = requests_[static_cast<std::size_t>(id)];
    if (policy_.carsharing && rental_available(r, inventory_, true)) {
        start_rental_trip(r);
        return;
    }
    if (try_dispatch(id)) return;
    pending_.push_back(id);
    maybe_prompt(id);
}

bool Simulation::try_dispatch(RequestId id) {
    if (policy_.carpool && try_pool(id)) return true;
    const TaxiId best = best_idle_taxi(requests_[static_cast<std::size_t>(id)].origin);
    if (best == kNone) return false;
    assign(taxis_[static_cast<std::size_t>(best)], requests_[static_cast<std::size_t>(id)]);
    return true;
}

bool Simulation::eligible_idle(const Taxi& t) const {
    return t.role == TaxiRole::Taxi && (t.state == TaxiState::IdleAtStop || t.state == TaxiState::Repositioning) &&
           !t.retiring && !t.stranded && battery_now(t) > cfg_.battery.reserve_kwh();
}

TaxiId Simulation::best_idle_taxi(NodeId origin) {
    TaxiId best = kNone;
    double best_eta = kInf;
    for (const Taxi& t : taxis_) {
        if (!eligible_idle(t)) continue;
        double eta = 0.0;
        if (t.moving()) {
            eta = (t.seg_arrival - clock()) + travel_time(net_.segment(t.segment).to, origin, policy_.path_policy);
        } else {
            eta = travel_time(t.node, origin, policy_.path_policy);
        }
        if (eta < best_eta) {
            best_eta = eta;
            best = t.id;
        }
    }
    return best;
}

void Simulation::assign(Taxi& t, RideRequest& r) {
    set_request_status(r, RequestStatus::Assigned);
    r.assigned_taxi = t.id;
    const double eta = t.moving() ? (t.seg_arrival - clock()) +
                                        travel_time(net_.segment(t.segment).to, r.origin, policy_.path_policy)
                                  : travel_time(t.node, r.origin, policy_.path_policy);
    r.pickup_deadline = clock() + std::max(eta, policy_.negotiation_wait_threshold);
    record(LogKind::RequestAssigned, r.id, t.id);
    transition(t, TaxiState::EnRouteToPickup);
    t.plan = {{r.origin, r.id, StopKind::Pickup}, {r.dest, r.id, StopKind::Dropoff}};
    set_course(t, r.origin, policy_.path_policy);
}

bool Simulation::try_pool(RequestId id) {
    RideRequest& r = requests_[static_cast<std::size_t>(id)];
    std::vector<PoolHost> hosts;
    for (const Taxi& t : taxis_) {
        if (t.role != TaxiRole::Taxi || t.retiring || t.stranded) continue;
        if (t.state != TaxiState::EnRouteToPickup && t.state != TaxiState::Occupied) continue;
        if (t.plan.empty() || static_cast<int>(t.onboard.size()) >= t.seats) continue;
        if (battery_now(t) <= cfg_.battery.reserve_kwh()) continue;
        PoolHost h;
        h.taxi = t.id;
        if (t.moving()) {
            h.start_node = net_.segment(t.segment).to;
            h.start_time = t.seg_arrival;
        } else {
            h.start_node = t.node;
            h.start_time = clock();
        }
        h.onboard = static_cast<int>(t.onboard.size());
        h.seats = t.seats;
        h.plan = t.plan;
        hosts.push_back(std::move(h));
    }
    if (hosts.empty()) return false;

    const PoolRequest req{r.id, r.origin, r.dest, r.direct_time, r.detour_scale};
    const PassengerLookup lookup = [this](RequestId q) {
        const RideRequest& p = requests_[static_cast<std::size_t>(q)];
        return PoolPassenger{p.direct_time, p.detour_scale, p.pickup_time, p.status == RequestStatus::Aboard,
                             p.pickup_deadline};
    };
    const PathPolicy policy = policy_.path_policy;
    const TravelTimeFn travel = [this, policy](NodeId a, NodeId b) { return travel_time(a, b, policy); };
    const auto match = carpool_match(req, hosts, lookup, travel, clock(), policy_.carpool_detour_factor,
                                     policy_.negotiation_wait_threshold);
    if (!match) return false;

    Taxi& t = taxis_[static_cast<std::size_t>(match->taxi)];
    set_request_status(r, RequestStatus::Assigned);
    r.assigned_taxi = t.id;
    r.pooled = true;
    r.pickup_deadline = clock() + policy_.negotiation_wait_threshold;
    record(LogKind::RequestPooled, r.id, t.id);
    const NodeId old_front = t.plan.front().node;
    t.plan = match->plan;
    if (t.plan.front().node != old_front) set_course(t, t.plan.front().node, policy_.path_policy);
    return true;
}

void Simulation::dispatch_pending() {
    if (dispatching_) {
        redispatch_ = true;
        return;
    }
    dispatching_ = true;
    do {
        redispatch_ = false;
        for (auto it = pending_.begin(); it != pending_.end();) {
            if (!policy_.carpool &&
                std::none_of(taxis_.begin(), taxis_.end(), [this](const Taxi& t) { return eligible_idle(t); }))
                break;
            if (try_dispatch(*it)) it = pending_.erase(it);
            else ++it;
        }
    } while (redispatch_);
    dispatching_ = false;
}

void Simulation::maybe_prompt(RequestId id) {
    if (!cfg_.negotiation.enabled) return;
    // Queued means no idle taxi and no pooling host: the estimate is unbounded.
    NegotiationPrompt p;
    p.id = static_cast<int>(prompts_.size());
    p.request = id;
    p.issued_at = clock();
    p.timeout = cfg_.negotiation.timeout;
    prompts_.push_back(p);
    record(LogKind::PromptIssued, p.id, id);
    queue_.schedule(clock() + p.timeout, EventKind::NegotiationTimeout, p.id);
    notify(Notice::Kind::Prompt, p.id, id);
}

void Simulation::on_negotiation_timeout(int prompt) {
    NegotiationPrompt& p = prompts_[static_cast<std::size_t>(prompt)];
    if (p.resolved) return;
    Command c;
    c.time = clock();
    c.kind = CommandKind::NegotiationReply;
    c.prompt = p.id;
    c.choice = p.default_choice;
    c.synthesized = true;
    applied_.push_back(c);
    const int index = static_cast<int>(applied_.size()) - 1;
    resolve_prompt(p, p.default_choice, true);
    record(LogKind::CommandApplied, index, static_cast<int>(c.kind), 1);
    notify(Notice::Kind::CommandApplied, index, static_cast<int>(c.kind));
}

void Simulation::resolve_prompt(NegotiationPrompt& p, NegotiationChoice choice, bool by_timeout) {
    p.resolved = true;
    p.resolution = choice;
    p.by_timeout = by_timeout;
    record(LogKind::PromptResolved, p.id, static_cast<int>(choice), by_timeout ? 1 : 0);
    RideRequest& r = requests_[static_cast<std::size_t>(p.request)];
    if (r.status != RequestStatus::Waiting) return;
    switch (choice) {
        case NegotiationChoice::KeepWaiting:
            break;
        case NegotiationChoice::CancelRequest:
            std::erase(pending_, r.id);
            std::erase(incoming_, r.id);
            set_request_status(r, RequestStatus::Cancelled);
            record(LogKind::RequestCancelled, r.id);
            break;
        case NegotiationChoice::OfferCarpool:
            r.detour_scale = 2.0;
            if (try_pool(r.id)) {
                std::erase(pending_, r.id);
                std::erase(incoming_, r.id);
            }
            break;
    }
}

// --- movement ----------------------------------------------------------------

void Simulation::set_course(Taxi& t, NodeId target, PathPolicy policy) {
    t.target = target;
    t.course_policy = policy;
    if (t.moving()) {
        const NodeId from = net_.segment(t.segment).to;
        t.route.clear();
        if (from != target) t.route = router_.route(net_, traffic_, from, target, policy).segments;
        return;
    }
    if (t.node == target) {
        t.route.clear();
        reach_target(t);
        return;
    }
    t.route = router_.route(net_, traffic_, t.node, target, policy).segments;
    enter_next_segment(t);
}

void Simulation::enter_next_segment(Taxi& t) {
    if (!t.moving()) settle_battery(t);
    const SegmentId seg = t.route.front();
    t.route.erase(t.route.begin());
    const RoadSegment& s = net_.segment(seg);
    if (s.from != t.node) throw ProtocolError("route does not start at the taxi's node");
    const auto upd = traffic_.enter(seg, t.id);
    if (upd.changed) queue_.schedule(clock(), EventKind::JamStateChanged, seg, upd.state == RoadState::Jammed);
    t.segment = seg;
    t.seg_progress = 0.0;
    t.seg_mark = clock();
    t.seg_jammed = traffic_.jammed(seg);
    schedule_arrival(t, movement_time(s, traffic_.occupancy(seg)));
}

void Simulation::schedule_arrival(Taxi& t, double duration) {
    t.seg_arrival = clock() + duration;
    ++t.move_token;
    queue_.schedule(t.seg_arrival, EventKind::TaxiArrivedAtNode, t.id, -1, t.move_token);
}

void Simulation::on_taxi_arrived(TaxiId id, std::uint64_t token) {
    Taxi& t = taxis_[static_cast<std::size_t>(id)];
    if (token != t.move_token || !t.moving()) return;
    const RoadSegment& s = net_.segment(t.segment);
    const auto upd = traffic_.leave(t.segment, t.id);
    if (upd.changed) queue_.schedule(clock(), EventKind::JamStateChanged, s.id, upd.state == RoadState::Jammed);
    t.segment = kNoSegment;
    t.node = s.to;
    t.seg_progress = 0.0;
    t.battery_kwh -= cfg_.battery.drive_energy(s.length_m);
    t.battery_mark = clock();
    if (t.battery_kwh < 0.0) {
        t.battery_kwh = 0.0;
        t.stranded = true;
        t.route.clear();
        record(LogKind::Stranded, t.id);
        return;
    }
    if (t.retiring && t.state == TaxiState::Repositioning) {
        retire(t);
        return;
    }
    if (!t.route.empty()) {
        enter_next_segment(t);
        return;
    }
    reach_target(t);
}

void Simulation::reach_target(Taxi& t) {
    switch (t.state) {
        case TaxiState::EnRouteToPickup:
        case TaxiState::Occupied:
            serve_stops(t);
            break;
        case TaxiState::Repositioning:
            stand_by(t, t.course_policy);
            break;
        case TaxiState::EnRouteToStation:
            station_arrival(t);
            break;
        case TaxiState::RentedOut:
            end_rental_trip(t);
            break;
        default:
            break;
    }
}

void Simulation::stand_by(Taxi& t, PathPolicy policy) {
    if (net_.is_stop(t.node)) {
        transition(t, TaxiState::IdleAtStop);
        t.target = t.node;
        t.route.clear();
        return;
    }
    transition(t, TaxiState::Repositioning);
    set_course(t, nearest_stop(net_, traffic_, t.node), policy);
}

void Simulation::retire(Taxi& t) {
    transition(t, TaxiState::Retired);
    t.route.clear();
    t.target = kNoNode;
    t.retiring = false;
}

void Simulation::on_jam_changed(SegmentId seg) {
    const bool jammed = traffic_.jammed(seg);
    record(LogKind::JamChanged, seg, jammed ? 1 : 0);
    const RoadSegment& s = net_.segment(seg);
    const auto on = traffic_.vehicles_on(seg);
    for (int vid : on) {
        Taxi& t = taxis_[static_cast<std::size_t>(vid)];
        if (t.seg_jammed == jammed) continue;
        const double span = t.seg_arrival - t.seg_mark;
        double frac = span > 0.0 ? t.seg_progress + (1.0 - t.seg_progress) * (clock() - t.seg_mark) / span : 1.0;
        frac = std::clamp(frac, 0.0, 1.0);
        t.seg_progress = frac;
        t.seg_mark = clock();
        t.seg_jammed = jammed;
        schedule_arrival(t, std::ceil((1.0 - frac) * edge_travel_time(s, traffic_.occupancy(seg))));
    }
    // Any flip can move projected pickup/dropoff times; those rides are
    // exempt from the detour audit.
    for (const Taxi& t : taxis_) {
        for (RequestId q : t.onboard) jam_delayed_[static_cast<std::size_t>(q)] = 1;
        for (const auto& stop : t.plan) jam_delayed_[static_cast<std::size_t>(stop.request)] = 1;
    }
    if (jammed) {
        const auto jammed_now = traffic_.jammed_segments();
        for (Taxi& t : taxis_) {
            if (t.route.empty() || t.stranded) continue;
            const bool hit = std::any_of(t.route.begin(), t.route.end(),
                                         [this](SegmentId r) { return traffic_.jammed(r); });
            if (!hit) continue;
            const NodeId from = t.moving() ? net_.segment(t.segment).to : t.node;
            auto detour = router_.route_excluding(net_, traffic_, from, t.target, t.course_policy, jammed_now);
            if (detour) t.route = detour->segments;
        }
    }
    notify(Notice::Kind::Jam, seg, jammed ? 1 : 0);
}

// --- service -----------------------------------------------------------------

void Simulation::serve_stops(Taxi& t) {
    bool freed = false;
    while (!t.plan.empty() && t.plan.front().node == t.node) {
        const PlanStop stop = t.plan.front();
        t.plan.erase(t.plan.begin());
        RideRequest& r = requests_[static_cast<std::size_t>(stop.request)];
        if (stop.kind == StopKind::Pickup) {
            set_request_status(r, RequestStatus::Aboard);
            r.pickup_time = clock();
            t.onboard.push_back(r.id);
            record(LogKind::RequestPickedUp, r.id, t.id);
        } else {
            set_request_status(r, RequestStatus::Delivered);
            r.dropoff_time = clock();
            std::erase(t.onboard, r.id);
            record(LogKind::RequestDelivered, r.id, t.id);
            freed = true;
        }
    }
    if (!t.plan.empty()) {
        transition(t, t.onboard.empty() ? TaxiState::EnRouteToPickup : TaxiState::Occupied);
        set_course(t, t.plan.front().node, policy_.path_policy);
        if (freed && policy_.carpool) dispatch_pending();
        return;
    }
    after_service(t);
}

void Simulation::after_service(Taxi& t) {
    if (t.retiring) {
        retire(t);
        return;
    }
    if (needs_charge(battery_now(t), t.state, cfg_.battery)) {
        go_charge(t);
        return;
    }
    stand_by(t, policy_.path_policy);
    dispatch_pending();
}

// --- charging ----------------------------------------------------------------

void Simulation::go_charge(Taxi& t) {
    transition(t, TaxiState::EnRouteToStation);
    std::vector<StationInfo> infos;
    for (const auto& st : stations_) {
        if (!st.active) continue;
        StationInfo info;
        info.id = st.site.id;
        info.eta = travel_time(t.node, st.site.node, PathPolicy::LeastTime);
        info.queue_length = static_cast<int>(st.queue.size());
        info.in_service = static_cast<int>(st.in_service.size());
        info.chargers = st.site.charger_count;
        infos.push_back(info);
    }
    t.station = select_station(infos, mean_full_charge_time(cfg_.battery, cfg_.charge_rate_kw));
    set_course(t, stations_[static_cast<std::size_t>(t.station)].site.node, policy_.path_policy);
}

void Simulation::station_arrival(Taxi& t) {
    StationRuntime& st = stations_[static_cast<std::size_t>(t.station)];
    if (!st.active) {
        go_charge(t);
        return;
    }
    record(LogKind::StationArrived, t.id, st.site.id);
    st.arrivals.push_back(t.id);
    if (st.queue.empty() && static_cast<int>(st.in_service.size()) < st.site.charger_count) {
        admit(t, st);
    } else {
        st.queue.push_back(t.id);
        transition(t, TaxiState::QueuedAtStation);
    }
}

void Simulation::admit(Taxi& t, StationRuntime& st) {
    transition(t, TaxiState::Charging);
    st.in_service.push_back(t.id);
    st.admissions.push_back(t.id);
    record(LogKind::StationAdmitted, t.id, st.site.id);
    const double duration = charge_duration(t.battery_kwh, t.capacity_kwh, st.site.charge_rate_kw);
    queue_.schedule(clock() + duration, EventKind::ChargeComplete, t.id, st.site.id);
}

void Simulation::on_charge_complete(TaxiId id, StationId station) {
    Taxi& t = taxis_[static_cast<std::size_t>(id)];
    StationRuntime& st = stations_[static_cast<std::size_t>(station)];
    settle_battery(t);
    t.battery_kwh = t.capacity_kwh;
    std::erase(st.in_service, id);
    record(LogKind::StationDeparted, id, station);
    if (!st.queue.empty()) {
        const TaxiId next = st.queue.front();
        st.queue.pop_front();
        admit(taxis_[static_cast<std::size_t>(next)], st);
    }
    t.station = -1;
    if (t.retiring) {
        retire(t);
        return;
    }
    stand_by(t, PathPolicy::LeastTime);
    dispatch_pending();
}

void Simulation::on_metrics_sample() {
    record(LogKind::MetricsSample);
    for (Taxi& t : taxis_) {
        if (t.role != TaxiRole::Taxi || t.state != TaxiState::IdleAtStop || t.retiring || t.stranded) continue;
        if (needs_charge(battery_now(t), t.state, cfg_.battery)) go_charge(t);
    }
    queue_.schedule(clock() + cfg_.metrics_interval, EventKind::MetricsSample);
    notify(Notice::Kind::Snapshot);
}

// --- rentals -----------------------------------------------------------------

void Simulation::start_rental_trip(RideRequest& r) {
    Taxi* car = nullptr;
    for (Taxi& t : taxis_) {
        if (t.role == TaxiRole::Rental && t.state == TaxiState::ParkedAtRentalSite && t.node == r.origin &&
            !t.stranded) {
            car = &t;
            break;
        }
    }
    if (!car) throw InventoryError("no rental car parked at node " + std::to_string(r.origin));
    start_rental(r, inventory_);
    set_request_status(r, RequestStatus::RentalTrip);
    r.rental = true;
    r.assigned_taxi = car->id;
    r.pickup_time = clock();
    record(LogKind::RentalStarted, r.id, car->id);
    transition(*car, TaxiState::RentedOut);
    car->onboard = {r.id};
    set_course(*car, r.dest, PathPolicy::LeastTime);
}

void Simulation::end_rental_trip(Taxi& car) {
    RideRequest& r = requests_[static_cast<std::size_t>(car.onboard.front())];
    set_request_status(r, RequestStatus::Delivered);
    r.dropoff_time = clock();
    end_rental(car.node, inventory_);
    car.onboard.clear();
    record(LogKind::RentalEnded, r.id, car.id, car.node);
    transition(car, TaxiState::ParkedAtRentalSite);
}

// --- commands ----------------------------------------------------------------

void Simulation::check_command(const Command& c, bool strict) const {
    auto bad = [](const std::string& why) { return CommandError(0, why); };
    switch (c.kind) {
        case CommandKind::Pause:
        case CommandKind::Resume:
        case CommandKind::StepUntil:
            break;
        case CommandKind::SetGenerationRate:
            if (!(c.value > 0.0) || !std::isfinite(c.value)) throw bad("rate multiplier must be > 0");
            break;
        case CommandKind::SetFleetSize: {
            const auto rentals = std::count_if(taxis_.begin(), taxis_.end(),
                                               [](const Taxi& t) { return t.role == TaxiRole::Rental; });
            if (c.count < 1 || c.count - rentals < 1) throw bad("fleet size must leave at least one taxi");
            break;
        }
        case CommandKind::SetStationCount:
            if (c.count < 1 || static_cast<std::size_t>(c.count) > stations_.size())
                throw bad("station count must be between 1 and the number of candidate sites");
            break;
        case CommandKind::SetPolicy:
            if (c.policy.carsharing.value_or(false) && !rentals_configured_)
                throw bad("car-sharing cannot be enabled in a run created without rental cars");
            if (c.policy.carpool_detour_factor && !(*c.policy.carpool_detour_factor >= 1.0))
                throw bad("carpool_detour_factor must be >= 1");
            if (c.policy.negotiation_wait_threshold && !(*c.policy.negotiation_wait_threshold >= 0.0))
                throw bad("negotiation_wait_threshold must be >= 0");
            break;
        case CommandKind::ForceAssign: {
            if (c.request < 0 || static_cast<std::size_t>(c.request) >= requests_.size())
                throw TargetError("no request " + std::to_string(c.request));
            if (c.taxi < 0 || static_cast<std::size_t>(c.taxi) >= taxis_.size())
                throw TargetError("no taxi " + std::to_string(c.taxi));
            if (strict) {
                if (requests_[static_cast<std::size_t>(c.request)].status != RequestStatus::Waiting)
                    throw TargetError("request " + std::to_string(c.request) + " is not waiting");
                if (!eligible_idle(taxis_[static_cast<std::size_t>(c.taxi)]))
                    throw TargetError("taxi " + std::to_string(c.taxi) + " is not idle");
            }
            break;
        }
        case CommandKind::RerouteTaxi: {
            if (c.taxi < 0 || static_cast<std::size_t>(c.taxi) >= taxis_.size())
                throw TargetError("no taxi " + std::to_string(c.taxi));
            if (!net_.valid_node(c.node)) throw TargetError("no node " + std::to_string(c.node));
            if (strict) {
                const Taxi& t = taxis_[static_cast<std::size_t>(c.taxi)];
                if (t.role != TaxiRole::Taxi || t.stranded ||
                    (t.state != TaxiState::IdleAtStop && t.state != TaxiState::Repositioning))
                    throw TargetError("taxi " + std::to_string(c.taxi) + " is not idle");
            }
            break;
        }
        case CommandKind::NegotiationReply:
            if (c.prompt < 0 || static_cast<std::size_t>(c.prompt) >= prompts_.size())
                throw TargetError("no prompt " + std::to_string(c.prompt));
            break;
    }
}

const Command& Simulation::submit(Command cmd) {
    check_command(cmd, true);
    cmd.synthesized = false;
    if (cmd.now) {
        cmd.time = std::nextafter(clock(), kInf);
        cmd.now = false;
    } else if (cmd.time <= clock()) {
        throw CommandError(inbox_.size(), "timestamp is not after the simulation clock");
    }
    auto pos = std::upper_bound(inbox_.begin() + static_cast<std::ptrdiff_t>(cursor_), inbox_.end(), cmd.time,
                                [](double t, const Command& c) { return t < c.time; });
    return *inbox_.insert(pos, cmd);
}

std::vector<Command> Simulation::recorded_log() const {
    std::vector<Command> out = applied_;
    for (std::size_t i = cursor_; i < inbox_.size(); ++i)
        if (!inbox_[i].synthesized) out.push_back(inbox_[i]);
    return out;
}

void Simulation::apply_command(const Command& cmd, std::size_t index) {
    check_command(cmd, false);
    Command applied = cmd;
    applied.time = clock();
    applied_.push_back(applied);
    const int aidx = static_cast<int>(applied_.size()) - 1;
    (void)index;
    bool accepted = true;
    switch (cmd.kind) {
        case CommandKind::Pause:
        case CommandKind::Resume:
        case CommandKind::StepUntil:
            break;
        case CommandKind::SetGenerationRate:
            profile_.replace_from(clock(), cmd.value);
            break;
        case CommandKind::SetFleetSize:
            resize_fleet(cmd.count);
            break;
        case CommandKind::SetStationCount:
            for (auto& st : stations_) st.active = st.site.id < cmd.count;
            active_stations_ = cmd.count;
            break;
        case CommandKind::SetPolicy:
            if (cmd.policy.path_policy) policy_.path_policy = *cmd.policy.path_policy;
            if (cmd.policy.carpool) policy_.carpool = *cmd.policy.carpool;
            if (cmd.policy.carsharing) policy_.carsharing = *cmd.policy.carsharing;
            if (cmd.policy.carpool_detour_factor) policy_.carpool_detour_factor = *cmd.policy.carpool_detour_factor;
            if (cmd.policy.negotiation_wait_threshold)
                policy_.negotiation_wait_threshold = *cmd.policy.negotiation_wait_threshold;
            break;
        case CommandKind::ForceAssign: {
            RideRequest& r = requests_[static_cast<std::size_t>(cmd.request)];
            Taxi& t = taxis_[static_cast<std::size_t>(cmd.taxi)];
            // queued: FIFO backlog or still waiting for the next dispatch tick
            const bool queued = std::find(pending_.begin(), pending_.end(), r.id) != pending_.end() ||
                                std::find(incoming_.begin(), incoming_.end(), r.id) != incoming_.end();
            if (r.status == RequestStatus::Waiting && queued && eligible_idle(t)) {
                std::erase(pending_, r.id);
                std::erase(incoming_, r.id);
                assign(t, r);
            } else {
                accepted = false;
            }
            break;
        }
        case CommandKind::RerouteTaxi: {
            Taxi& t = taxis_[static_cast<std::size_t>(cmd.taxi)];
            if (t.role == TaxiRole::Taxi && !t.stranded &&
                (t.state == TaxiState::IdleAtStop || t.state == TaxiState::Repositioning)) {
                transition(t, TaxiState::Repositioning);
                set_course(t, cmd.node, policy_.path_policy);
            } else {
                accepted = false;
            }
            break;
        }
        case CommandKind::NegotiationReply: {
            NegotiationPrompt& p = prompts_[static_cast<std::size_t>(cmd.prompt)];
            if (p.resolved) accepted = false;  // stale reply: logged, no effect
            else resolve_prompt(p, cmd.choice, false);
            break;
        }
    }
    record(LogKind::CommandApplied, aidx, static_cast<int>(cmd.kind), accepted ? 1 : 0);
    notify(Notice::Kind::CommandApplied, aidx, static_cast<int>(cmd.kind));
    if (accepted) dispatch_pending();
}

void Simulation::resize_fleet(int total) {
    const int rentals = static_cast<int>(
        std::count_if(taxis_.begin(), taxis_.end(), [](const Taxi& t) { return t.role == TaxiRole::Rental; }));
    const int target = total - rentals;
    int active = 0;
    for (const Taxi& t : taxis_)
        if (t.role == TaxiRole::Taxi && t.state != TaxiState::Retired && !t.retiring) ++active;
    if (target > active) {
        int need = target - active;
        for (Taxi& t : taxis_) {
            if (need == 0) break;
            if (t.role == TaxiRole::Taxi && t.retiring && t.state != TaxiState::Retired) {
                t.retiring = false;
                --need;
            }
        }
        const auto& towns = net_.towns();
        for (; need > 0; --need) spawn_taxi(TaxiRole::Taxi, towns[spawn_cursor_++ % towns.size()].center, 1.0);
    } else if (target < active) {
        int excess = active - target;
        for (Taxi& t : taxis_) {
            if (excess == 0) break;
            if (t.role == TaxiRole::Taxi && !t.retiring && !t.stranded && t.state == TaxiState::IdleAtStop) {
                retire(t);
                --excess;
            }
        }
        for (Taxi& t : taxis_) {
            if (excess == 0) break;
            if (t.role == TaxiRole::Taxi && !t.retiring && t.state != TaxiState::Retired) {
                t.retiring = true;
                --excess;
            }
        }
    }
}

// --- observation ---------------------------------------------------------------

SimSnapshot Simulation::snapshot() const {
    SimSnapshot s;
    s.time = clock();
    for (const Taxi& t : taxis_) {
        if (t.state == TaxiState::Retired) continue;
        TaxiView v;
        v.id = t.id;
        v.role = to_string(t.role);
        v.state = to_string(t.state);
        v.node = t.node;
        v.segment = t.segment;
        const Intersection& a = net_.nodes()[static_cast<std::size_t>(t.node)];
        v.x = a.x;
        v.y = a.y;
        if (t.moving()) {
            const double span = t.seg_arrival - t.seg_mark;
            double frac = span > 0.0 ? t.seg_progress + (1.0 - t.seg_progress) * (clock() - t.seg_mark) / span : 1.0;
            frac = std::clamp(frac, 0.0, 1.0);
            v.progress = frac;
            const Intersection& b = net_.nodes()[static_cast<std::size_t>(net_.segment(t.segment).to)];
            v.x = a.x + (b.x - a.x) * frac;
            v.y = a.y + (b.y - a.y) * frac;
        }
        v.battery_kwh = battery_now(t);
        v.onboard = t.onboard;
        v.plan = t.plan;
        v.route = t.route;
        v.target = t.target;
        v.station = t.station;
        v.retiring = t.retiring;
        v.stranded = t.stranded;
        s.taxis.push_back(std::move(v));
    }
    for (const auto& st : stations_) {
        StationView v;
        v.id = st.site.id;
        v.node = st.site.node;
        v.active = st.active;
        v.chargers = st.site.charger_count;
        v.state = static_cast<int>(st.in_service.size()) >= st.site.charger_count ? "BUSY" : "IDLE";
        v.queue.assign(st.queue.begin(), st.queue.end());
        v.in_service = st.in_service;
        s.stations.push_back(std::move(v));
    }
    for (const auto& seg : net_.segments())
        s.roads.push_back({seg.id, traffic_.occupancy(seg.id), traffic_.jammed(seg.id)});
    for (const auto& r : requests_) {
        if (r.status == RequestStatus::Delivered || r.status == RequestStatus::Cancelled) continue;
        s.pending.push_back({r.id, r.call_time, r.origin, r.dest, to_string(r.status), r.assigned_taxi});
    }
    for (const auto& p : prompts_)
        if (!p.resolved) s.prompts.push_back(p);
    s.metrics = metrics();
    s.metrics.series.clear();
    return s;
}

MetricsReport Simulation::metrics() const {
    MetricsReport m = metrics_.report(clock());
    m.seed = cfg_.seed;
    m.config_hash = config_hash(cfg_);
    return m;
}

MetricsReport run_scenario(const ScenarioConfig& cfg, std::span<const Command> commands) {
    Simulation sim(cfg);
    sim.run_until(cfg.horizon, commands);
    return sim.metrics();
}

}  // namespace etaxi
