#include "etaxi/gateway.hpp"

#include "etaxi/errors.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace etaxi {

using json = nlohmann::json;

json stream_message(const Simulation& sim, const Notice& n) {
    json payload{{"time", n.time}, {"snapshot", to_json(sim.snapshot())}};
    std::string kind;
    switch (n.kind) {
        case Notice::Kind::Snapshot:
            kind = "snapshot";
            break;
        case Notice::Kind::Jam:
            kind = "jam";
            payload["segment"] = n.a;
            payload["jammed"] = n.b == 1;
            break;
        case Notice::Kind::Prompt:
            kind = "prompt";
            payload["prompt"] = to_json(sim.prompts().at(static_cast<std::size_t>(n.a)));
            break;
        case Notice::Kind::CommandApplied: {
            kind = "command_applied";
            payload["index"] = n.a;
            payload["command"] = to_json(sim.applied_commands().at(static_cast<std::size_t>(n.a)));
            bool accepted = true;
            const auto& log = sim.log();
            for (auto it = log.rbegin(); it != log.rend(); ++it) {
                if (it->kind == LogKind::CommandApplied && it->a == n.a) {
                    accepted = it->c != 0;
                    break;
                }
            }
            payload["accepted"] = accepted;
            break;
        }
    }
    return json{{"kind", kind}, {"payload", std::move(payload)}};
}

std::vector<std::string> replay_stream(const ScenarioConfig& cfg, const std::vector<Command>& log, double until) {
    Simulation sim(cfg);
    std::vector<std::string> out;
    sim.set_observer([&](const Notice& n) { out.push_back(stream_message(sim, n).dump()); });
    sim.run_until(until, log);
    return out;
}

// --- Run ---------------------------------------------------------------------

Run::Run(std::string id, const ScenarioConfig& cfg, RunOptions opts)
    : id_(std::move(id)), opts_(opts), sim_(cfg), paused_(opts.paused) {
    if (!(opts_.ratio >= 0.0) || !std::isfinite(opts_.ratio)) throw ConfigError("ratio must be finite and >= 0");
    sim_.set_observer([this](const Notice& n) { publish_locked(n); });
    if (opts_.ratio > 0.0) thread_ = std::thread([this] { worker(); });
}

Run::~Run() {
    {
        std::lock_guard lk(wake_mu_);
        stop_ = true;
    }
    wake_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void Run::publish_locked(const Notice& n) {
    if (sinks_.empty()) return;
    auto msg = std::make_shared<const std::string>(stream_message(sim_, n).dump());
    for (auto& [token, sink] : sinks_) sink(msg);
}

void Run::advance_locked(double t) {
    t = std::min(t, sim_.config().horizon);
    if (t <= sim_.clock()) return;
    sim_.advance(t);
}

Command Run::control(Command cmd) {
    std::lock_guard lk(mu_);
    if (sim_.clock() >= sim_.config().horizon) throw CommandError(0, "run has reached its horizon");
    const bool immediate = cmd.now;
    const Command stamped = sim_.submit(cmd);
    switch (stamped.kind) {
        case CommandKind::Pause: paused_ = true; break;
        case CommandKind::Resume: paused_ = false; break;
        case CommandKind::StepUntil: paused_ = true; break;
        default: break;
    }
    if (immediate) advance_locked(stamped.time);
    if (stamped.kind == CommandKind::StepUntil) {
        advance_locked(std::max(stamped.time, stamped.value));
    }
    return stamped;
}

void Run::tick(double wall_seconds) {
    std::lock_guard lk(mu_);
    if (paused_ || opts_.ratio <= 0.0 || sim_.clock() >= sim_.config().horizon) return;
    advance_locked(sim_.clock() + opts_.ratio * wall_seconds);
}

void Run::worker() {
    using clock = std::chrono::steady_clock;
    auto last = clock::now();
    std::unique_lock lk(wake_mu_);
    while (!stop_) {
        wake_.wait_for(lk, std::chrono::milliseconds(opts_.tick_ms));
        if (stop_) break;
        const auto now = clock::now();
        const double dt = std::chrono::duration<double>(now - last).count();
        last = now;
        lk.unlock();
        tick(dt);
        lk.lock();
    }
}

SimSnapshot Run::snapshot() const {
    std::lock_guard lk(mu_);
    return sim_.snapshot();
}

std::vector<Command> Run::command_log() const {
    std::lock_guard lk(mu_);
    return sim_.recorded_log();
}

MetricsReport Run::metrics() const {
    std::lock_guard lk(mu_);
    return sim_.metrics();
}

ScenarioConfig Run::config() const {
    std::lock_guard lk(mu_);
    return sim_.config();
}

bool Run::paused() const {
    std::lock_guard lk(mu_);
    return paused_;
}

bool Run::finished() const {
    std::lock_guard lk(mu_);
    return sim_.clock() >= sim_.config().horizon;
}

double Run::clock() const {
    std::lock_guard lk(mu_);
    return sim_.clock();
}

int Run::subscribe(Sink sink, bool current) {
    std::lock_guard lk(mu_);
    if (current) {
        json msg{{"kind", "snapshot"}, {"payload", {{"time", sim_.clock()}, {"snapshot", to_json(sim_.snapshot())}}}};
        sink(std::make_shared<const std::string>(msg.dump()));
    }
    const int token = next_sink_++;
    sinks_.emplace(token, std::move(sink));
    return token;
}

void Run::unsubscribe(int token) {
    std::lock_guard lk(mu_);
    sinks_.erase(token);
}

// --- RunManager ----------------------------------------------------------------

std::shared_ptr<Run> RunManager::create(const ScenarioConfig& cfg, RunOptions opts) {
    std::string id;
    {
        std::lock_guard lk(mu_);
        id = "run-" + std::to_string(next_++);
    }
    auto run = std::make_shared<Run>(id, cfg, opts);
    std::lock_guard lk(mu_);
    runs_.emplace(id, run);
    return run;
}

std::shared_ptr<Run> RunManager::get(const std::string& id) const {
    std::lock_guard lk(mu_);
    auto it = runs_.find(id);
    if (it == runs_.end()) throw NotFoundError("no run '" + id + "'");
    return it->second;
}

bool RunManager::erase(const std::string& id) {
    std::shared_ptr<Run> doomed;
    {
        std::lock_guard lk(mu_);
        auto it = runs_.find(id);
        if (it == runs_.end()) return false;
        doomed = std::move(it->second);
        runs_.erase(it);
    }
    return true;
}

std::vector<std::string> RunManager::ids() const {
    std::lock_guard lk(mu_);
    std::vector<std::string> out;
    for (const auto& [id, run] : runs_) out.push_back(id);
    return out;
}

// --- routing -------------------------------------------------------------------

namespace {

std::vector<std::string> split_path(const std::string& target) {
    std::string path = target.substr(0, target.find('?'));
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        if (path[i] == '/') {
            ++i;
            continue;
        }
        const std::size_t j = path.find('/', i);
        parts.push_back(path.substr(i, j == std::string::npos ? std::string::npos : j - i));
        if (j == std::string::npos) break;
        i = j;
    }
    return parts;
}

HttpReply error_reply(int status, const std::string& kind, const std::string& message) {
    return {status, json{{"error", kind}, {"message", message}}};
}

HttpReply create_run(RunManager& runs, const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        return error_reply(400, "ConfigError", std::string("body is not valid JSON: ") + e.what());
    }
    RunOptions opts;
    json cfg_json = j;
    if (j.is_object() && j.contains("config")) {
        cfg_json = j.at("config");
        try {
            opts.ratio = j.value("ratio", opts.ratio);
            opts.paused = j.value("paused", opts.paused);
        } catch (const json::exception& e) {
            return error_reply(400, "ConfigError", e.what());
        }
    }
    auto run = runs.create(scenario_from_json(cfg_json), opts);
    return {201, json{{"run_id", run->id()}}};
}

HttpReply run_status(const Run& run) {
    return {200, json{{"run_id", run.id()},
                      {"time", run.clock()},
                      {"paused", run.paused()},
                      {"finished", run.finished()},
                      {"config_hash", config_hash(run.config())}}};
}

}  // namespace

HttpReply handle_request(RunManager& runs, const std::string& method, const std::string& target,
                         const std::string& body) {
    const auto parts = split_path(target);
    try {
        if (parts.empty() || parts[0] != "runs") return error_reply(404, "NotFound", "no route " + target);
        if (parts.size() == 1) {
            if (method == "POST") return create_run(runs, body);
            if (method == "GET") return {200, json{{"runs", runs.ids()}}};
            return error_reply(405, "MethodNotAllowed", method + " " + target);
        }
        const std::string& id = parts[1];
        if (parts.size() == 2) {
            if (method == "GET") return run_status(*runs.get(id));
            if (method == "DELETE") {
                if (!runs.erase(id)) throw NotFoundError("no run '" + id + "'");
                return {200, json{{"deleted", id}}};
            }
            return error_reply(405, "MethodNotAllowed", method + " " + target);
        }
        if (parts.size() == 3) {
            auto run = runs.get(id);
            if (parts[2] == "commands" && method == "POST") {
                json j;
                try {
                    j = json::parse(body);
                } catch (const json::exception& e) {
                    throw CommandError(0, std::string("body is not valid JSON: ") + e.what());
                }
                const Command applied = run->control(command_from_json(j));
                return {200, json{{"accepted", true}, {"command", to_json(applied)}, {"time", run->clock()}}};
            }
            if (parts[2] == "snapshot" && method == "GET") return {200, to_json(run->snapshot())};
            if (parts[2] == "log" && method == "GET") return {200, log_to_json(run->command_log())};
            if (parts[2] == "metrics" && method == "GET") return {200, to_json(run->metrics())};
        }
        return error_reply(404, "NotFound", "no route " + method + " " + target);
    } catch (const NotFoundError& e) {
        return error_reply(404, "NotFound", e.what());
    } catch (const CommandError& e) {
        HttpReply r = error_reply(400, "CommandError", e.reason());
        r.body["index"] = e.index();
        r.body["reason"] = e.reason();
        return r;
    } catch (const TargetError& e) {
        return error_reply(422, "TargetError", e.what());
    } catch (const ConfigError& e) {
        return error_reply(400, "ConfigError", e.what());
    } catch (const ConstructionError& e) {
        return error_reply(400, "ConfigError", e.what());
    }
}

}  // namespace etaxi
