#pragma once

#include "etaxi/simulation.hpp"

#include "json.hpp"

#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace etaxi {

struct RunOptions {
    double ratio = 60.0;  // virtual seconds per wall second; 0: only StepUntil moves the clock
    bool paused = false;
    int tick_ms = 50;
};

// Stream message for one notice: {"kind", "payload"}. Every payload carries
// the snapshot taken at that event boundary, so live and replayed streams
// can be compared message by message.
nlohmann::json stream_message(const Simulation& sim, const Notice& n);

// Headless replay of (config, command log), collecting the messages a live
// stream would have carried.
std::vector<std::string> replay_stream(const ScenarioConfig& cfg, const std::vector<Command>& log, double until);

using Sink = std::function<void(std::shared_ptr<const std::string>)>;

// One live simulation with its own pacing thread. All access to the engine
// goes through the run's mutex; subscribers receive serialized messages in
// emission order and must not block.
class Run {
public:
    Run(std::string id, const ScenarioConfig& cfg, RunOptions opts);
    ~Run();
    Run(const Run&) = delete;
    Run& operator=(const Run&) = delete;

    const std::string& id() const noexcept { return id_; }

    // Validates and applies at the next event boundary. Pause, Resume and
    // StepUntil also steer the pacing. Throws CommandError / TargetError.
    Command control(Command cmd);

    SimSnapshot snapshot() const;
    std::vector<Command> command_log() const;
    MetricsReport metrics() const;
    ScenarioConfig config() const;
    bool paused() const;
    bool finished() const;
    double clock() const;

    // With `current`, the sink first gets a "snapshot" message of the state now.
    int subscribe(Sink sink, bool current = false);
    void unsubscribe(int token);

    // Advances paced time by `wall_seconds`; used by the worker and by tests.
    void tick(double wall_seconds);

private:
    void worker();
    void advance_locked(double t);
    void publish_locked(const Notice& n);

    std::string id_;
    RunOptions opts_;
    mutable std::mutex mu_;
    Simulation sim_;
    bool paused_;
    std::map<int, Sink> sinks_;
    int next_sink_ = 0;

    std::mutex wake_mu_;
    std::condition_variable wake_;
    bool stop_ = false;
    std::thread thread_;
};

class RunManager {
public:
    std::shared_ptr<Run> create(const ScenarioConfig& cfg, RunOptions opts = {});
    std::shared_ptr<Run> get(const std::string& id) const;  // NotFoundError
    bool erase(const std::string& id);
    std::vector<std::string> ids() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Run>> runs_;
    int next_ = 1;
};

struct HttpReply {
    int status = 200;
    nlohmann::json body;
};

// Routing without the socket layer: POST /runs, POST /runs/{id}/commands,
// GET /runs/{id}/snapshot, GET /runs/{id}/log, GET /runs, DELETE /runs/{id}.
HttpReply handle_request(RunManager& runs, const std::string& method, const std::string& target,
                         const std::string& body);

// HTTP + WebSocket front end on Boost.Beast. WebSocket clients connect to
// /runs/{id}/stream.
class GatewayServer {
public:
    GatewayServer(RunManager& runs, const std::string& host, unsigned short port, int threads = 2);
    ~GatewayServer();
    GatewayServer(const GatewayServer&) = delete;
    GatewayServer& operator=(const GatewayServer&) = delete;

    unsigned short port() const noexcept;
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace etaxi
