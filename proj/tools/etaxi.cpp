#include "etaxi/errors.hpp"
#include "etaxi/experiment.hpp"
#include "etaxi/simulation.hpp"
#include "etaxi/snapshot.hpp"

#include "CLI11.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace etaxi;
namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw SpecError("cannot write " + p.string());
    out << text;
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(path + " is not valid JSON: " + e.what());
    }
}

int cmd_simulate(const std::string& config, std::optional<std::uint64_t> seed, std::optional<double> until,
                 const std::string& commands, const std::string& out, const std::string& snapshot_out) {
    ScenarioConfig cfg = config.empty() ? ScenarioConfig{} : load_scenario(config);
    if (seed) cfg.seed = *seed;
    double t_end = until ? *until : cfg.horizon;
    std::vector<Command> log;
    if (!commands.empty()) log = log_from_json(read_json(commands));

    Simulation sim(cfg);
    SimSnapshot snap = sim.run_until(t_end, log);
    MetricsReport m = sim.metrics();

    std::ostringstream csv;
    csv << "time,passenger_avg_wait,taxi_avg_idle,taxi_avg_queue_wait\n";
    for (const auto& p : m.series)
        csv << num(p.time) << ',' << num(p.passenger_avg_wait) << ',' << num(p.taxi_avg_idle) << ','
            << num(p.taxi_avg_queue_wait) << '\n';
    if (out.empty()) std::cout << csv.str();
    else write_file(out, csv.str());
    if (!snapshot_out.empty()) write_file(snapshot_out, to_json(snap).dump(2) + "\n");

    std::cerr << "seed " << cfg.seed << " t=" << num(sim.clock()) << " wait " << num(m.passenger_avg_wait)
              << " idle " << num(m.taxi_avg_idle) << " queue " << num(m.taxi_avg_queue_wait) << " requests "
              << m.requests << " stranded " << m.stranded << "\n";
    return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_dir, std::optional<int> jobs, bool quiet) {
    SweepSpec spec = load_sweep(spec_path);
    if (jobs) spec.jobs = *jobs;
    SweepProgress progress;
    if (!quiet)
        progress = [](std::size_t d, std::size_t total) {
            if (d == total || d % 50 == 0) std::cerr << "\r" << d << "/" << total << std::flush;
        };
    SweepResult r = run_sweep(spec, progress);
    if (!quiet) std::cerr << "\n";
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / (spec.name + ".csv"), rows_csv(r));
    write_file(fs::path(out_dir) / (spec.name + "_aggregate.csv"), aggregate_csv(r));
    std::cout << "wrote " << r.rows.size() << " rows to " << (fs::path(out_dir) / (spec.name + ".csv")).string()
              << (r.tainted ? " (tainted: some runs stranded a vehicle)" : "") << "\n";
    return r.tainted ? 3 : 0;
}

int cmd_check(const std::string& csv, const std::string& expect) {
    CsvTable t = CsvTable::load(csv);
    auto verdicts = check_trends(t, expectations_from_json(read_json(expect)));
    bool ok = true;
    for (const auto& v : verdicts) {
        std::cout << format_verdict(v) << "\n";
        if (v.hard && !v.pass) ok = false;
    }
    return ok ? 0 : 1;
}

int cmd_calibrate(const std::string& base_path, const std::string& out, const std::string& grid_path,
                  std::optional<int> jobs) {
    ScenarioConfig base = base_path.empty() ? ScenarioConfig{} : load_scenario(base_path);
    CalibrationGrid grid;
    grid.means = {480, 540, 600, 660, 720};
    grid.chargers = {1, 2};
    if (!grid_path.empty()) {
        auto j = read_json(grid_path);
        if (j.contains("means")) grid.means = j.at("means").get<std::vector<double>>();
        if (j.contains("chargers")) grid.chargers = j.at("chargers").get<std::vector<int>>();
        if (j.contains("replications")) grid.replications = j.at("replications").get<int>();
    }
    if (jobs) grid.jobs = *jobs;
    CalibrationResult r = calibrate(base, grid, [](std::size_t d, std::size_t total) {
        if (d == total || d % 100 == 0) std::cerr << "\r" << d << "/" << total << std::flush;
    });
    std::cerr << "\n";
    for (const auto& c : r.candidates)
        std::cout << "mean " << num(c.mean) << " chargers " << c.chargers << " fleet knee " << c.fleet_knee
                  << " station knee " << c.station_knee << (c.feasible ? " feasible" : "") << "\n";
    std::cout << "chosen: mean " << num(r.chosen.mean) << " chargers " << r.chosen.chargers << "\n";
    save_scenario(r.config, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Electric taxi dial-a-ride simulator: batch runs, sweeps and trend checks"};
    app.require_subcommand(1);

    std::string config, commands, out, snapshot_out, spec, out_dir, csv, expect, grid;
    std::optional<std::uint64_t> seed;
    std::optional<double> until;
    std::optional<int> jobs;
    bool quiet = false;

    auto* sim = app.add_subcommand("simulate", "run one scenario and write its metric time series");
    sim->add_option("--config", config, "scenario JSON (default: built-in scenario)");
    sim->add_option("--seed", seed, "master seed override");
    sim->add_option("--until", until, "virtual seconds to run (default: horizon)");
    sim->add_option("--commands", commands, "command log JSON to replay");
    sim->add_option("--out", out, "CSV output (default: stdout)");
    sim->add_option("--snapshot", snapshot_out, "write the final snapshot JSON here");

    auto* sweep = app.add_subcommand("sweep", "run a sweep spec and write row and aggregate CSVs");
    sweep->add_option("--spec", spec, "sweep spec JSON")->required();
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_option("--jobs", jobs, "worker threads");
    sweep->add_flag("--quiet", quiet, "no progress output");

    auto* check = app.add_subcommand("check", "evaluate trend expectations against a sweep CSV");
    check->add_option("--csv", csv, "row CSV from sweep")->required();
    check->add_option("--expect", expect, "expectations JSON")->required();

    auto* cal = app.add_subcommand("calibrate", "grid-search demand and chargers, write the calibrated scenario");
    cal->add_option("--out", out, "scenario JSON to write")->required();
    cal->add_option("--base", config, "starting scenario JSON");
    cal->add_option("--grid", grid, "grid JSON {means, chargers, replications}");
    cal->add_option("--jobs", jobs, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return cmd_simulate(config, seed, until, commands, out, snapshot_out);
        if (*sweep) return cmd_sweep(spec, out_dir, jobs, quiet);
        if (*check) return cmd_check(csv, expect);
        if (*cal) return cmd_calibrate(config, out, grid, jobs);
    } catch (const CalibrationError& e) {
        std::cerr << "calibration failed: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
