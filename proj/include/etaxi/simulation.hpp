#pragma once

#include "etaxi/city.hpp"
#include "etaxi/commands.hpp"
#include "etaxi/demand.hpp"
#include "etaxi/dispatch.hpp"
#include "etaxi/event_log.hpp"
#include "etaxi/events.hpp"
#include "etaxi/fleet.hpp"
#include "etaxi/metrics.hpp"
#include "etaxi/rng.hpp"
#include "etaxi/scenario.hpp"
#include "etaxi/snapshot.hpp"

#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace etaxi {

struct StationRuntime {
    StationSite site;
    bool active = true;
    std::deque<TaxiId> queue;
    std::vector<TaxiId> in_service;
    std::vector<TaxiId> arrivals;    // arrival order, for FIFO audits
    std::vector<TaxiId> admissions;  // admission order
};

// Something a stream subscriber may want to see, raised at an event boundary.
struct Notice {
    enum class Kind { Snapshot, Jam, Prompt, CommandApplied };
    Kind kind = Kind::Snapshot;
    double time = 0.0;
    int a = -1;  // segment / prompt / command index
    int b = -1;  // jammed flag / request / command kind
};

// One deterministic run. External input is the command log; output is the
// event log, snapshots and the metrics report.
class Simulation {
public:
    explicit Simulation(const ScenarioConfig& cfg);

    // Processes every event with time <= t_end, applying `commands` (the full
    // log so far; entries already consumed are skipped) at their timestamps.
    SimSnapshot run_until(double t_end, std::span<const Command> commands);
    SimSnapshot run_until(double t_end) { return run_until(t_end, {}); }

    // Live use: validate against current state, stamp "now" commands and
    // queue them. Throws TargetError / CommandError without changing state.
    const Command& submit(Command cmd);
    void advance(double t_end);
    bool has_pending_commands() const { return cursor_ < inbox_.size(); }

    // Checks a command against the current state. `strict` also rejects
    // commands whose target exists but is in the wrong state.
    void check_command(const Command& cmd, bool strict) const;

    SimSnapshot snapshot() const;
    MetricsReport metrics() const;

    double clock() const noexcept { return queue_.now(); }
    const ScenarioConfig& config() const noexcept { return cfg_; }
    const RoadNetwork& network() const noexcept { return net_; }
    const TrafficState& traffic() const noexcept { return traffic_; }
    const std::vector<Taxi>& taxis() const noexcept { return taxis_; }
    const std::vector<RideRequest>& requests() const noexcept { return requests_; }
    const std::vector<StationRuntime>& stations() const noexcept { return stations_; }
    const std::deque<RequestId>& pending() const noexcept { return pending_; }
    const std::vector<NegotiationPrompt>& prompts() const noexcept { return prompts_; }
    const PolicyConfig& policy() const noexcept { return policy_; }
    const EventLog& log() const noexcept { return log_; }
    // Commands in application order, engine-synthesized ones included.
    const std::vector<Command>& applied_commands() const noexcept { return applied_; }
    // Applied commands followed by queued, not yet applied ones.
    std::vector<Command> recorded_log() const;
    const RentalInventory& rental_inventory() const noexcept { return inventory_; }
    std::uint64_t arrival_hash() const noexcept { return arrival_hash_; }
    std::uint64_t events_processed() const noexcept { return events_processed_; }
    // Requests whose ride was lengthened by a jam or a jam reroute.
    const std::vector<char>& jam_delayed() const noexcept { return jam_delayed_; }

    // Current battery including lazily settled drain or charge.
    double battery_now(const Taxi& t) const;
    // Time in each state including the open interval.
    std::array<double, kTaxiStateCount> time_in_state(const Taxi& t) const;

    void set_observer(std::function<void(const Notice&)> fn) { observer_ = std::move(fn); }
    void set_event_hook(std::function<void(const Simulation&)> fn) { hook_ = std::move(fn); }

private:
    void process(const SimEvent& ev);
    void apply_command(const Command& cmd, std::size_t index);
    void after_step();

    void on_passenger_arrival();
    void on_taxi_arrived(TaxiId id, std::uint64_t token);
    void on_charge_complete(TaxiId id, StationId station);
    void on_jam_changed(SegmentId seg);
    void on_metrics_sample();
    void on_dispatch_tick();
    void on_negotiation_timeout(int prompt);

    // movement
    void set_course(Taxi& t, NodeId target, PathPolicy policy);
    void enter_next_segment(Taxi& t);
    void schedule_arrival(Taxi& t, double duration);
    void reach_target(Taxi& t);
    void settle_battery(Taxi& t);
    void transition(Taxi& t, TaxiState to);
    void retire(Taxi& t);

    // service
    void handle_request(RequestId id);
    bool try_dispatch(RequestId id);
    bool try_pool(RequestId id);
    void dispatch_pending();
    TaxiId best_idle_taxi(NodeId origin);
    bool eligible_idle(const Taxi& t) const;
    void assign(Taxi& t, RideRequest& r);
    void serve_stops(Taxi& t);
    void after_service(Taxi& t);
    void stand_by(Taxi& t, PathPolicy policy);
    void maybe_prompt(RequestId id);
    void set_request_status(RideRequest& r, RequestStatus s);

    // charging
    void go_charge(Taxi& t);
    void station_arrival(Taxi& t);
    void admit(Taxi& t, StationRuntime& st);

    // rentals
    void start_rental_trip(RideRequest& r);
    void end_rental_trip(Taxi& car);

    // commands
    void resize_fleet(int total);
    void spawn_taxi(TaxiRole role, NodeId node, double soc);
    void resolve_prompt(NegotiationPrompt& p, NegotiationChoice choice, bool by_timeout);

    double travel_time(NodeId from, NodeId to, PathPolicy policy);
    void record(LogKind kind, int a = -1, int b = -1, int c = -1);
    void notify(Notice::Kind kind, int a = -1, int b = -1);

    ScenarioConfig cfg_;
    RoadNetwork net_;
    TrafficState traffic_;
    Router router_;
    RngStreams rng_;
    EventQueue queue_;
    DemandProfile profile_;
    PolicyConfig policy_;

    std::vector<Taxi> taxis_;
    std::vector<RideRequest> requests_;
    std::vector<StationRuntime> stations_;
    std::deque<RequestId> pending_;
    std::vector<RequestId> incoming_;  // awaiting the next dispatch tick
    RentalInventory inventory_;
    std::vector<NegotiationPrompt> prompts_;
    std::vector<char> jam_delayed_;
    int active_stations_ = 0;
    std::size_t spawn_cursor_ = 0;
    bool rentals_configured_ = false;

    EventLog log_;
    MetricsAccumulator metrics_;
    std::uint64_t arrival_hash_ = 0xcbf29ce484222325ULL;
    std::uint64_t events_processed_ = 0;

    std::vector<Command> inbox_;
    std::size_t cursor_ = 0;
    std::vector<Command> applied_;

    bool dispatching_ = false;
    bool redispatch_ = false;

    std::vector<Notice> notices_;
    std::function<void(const Notice&)> observer_;
    std::function<void(const Simulation&)> hook_;
};

// Convenience for batch use: run a config to its horizon.
MetricsReport run_scenario(const ScenarioConfig& cfg, std::span<const Command> commands = {});

}  // namespace etaxi
