#pragma once

#include "etaxi/metrics.hpp"
#include "etaxi/scenario.hpp"

#include "json.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace etaxi {

enum class SweepAxis { Fleet, Stations };

const char* to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

// A named arm of a sweep: a JSON merge patch applied to the base scenario.
struct SweepVariant {
    std::string name = "base";
    nlohmann::json patch = nlohmann::json::object();
};

struct SweepSpec {
    std::string name;
    ScenarioConfig base;
    SweepAxis axis = SweepAxis::Fleet;
    std::vector<int> values;
    std::vector<SweepVariant> variants;  // empty: the base alone
    int replications = 10;
    std::vector<std::uint64_t> seeds;  // empty: 1..replications
    int jobs = 1;

    void validate() const;  // SpecError
    std::vector<std::uint64_t> seed_list() const;
    std::vector<SweepVariant> variant_list() const;
    ScenarioConfig cell(const SweepVariant& v, int axis_value, std::uint64_t seed) const;
};

// Relative paths in a sweep file (its "base" entry) resolve against `dir`.
SweepSpec sweep_from_json(const nlohmann::json& j, const std::string& dir = ".");
SweepSpec load_sweep(const std::string& path);

struct SweepRow {
    std::string variant;
    SweepAxis axis = SweepAxis::Fleet;
    int axis_value = 0;
    int replication = 0;
    std::uint64_t seed = 0;
    MetricsReport report;
    std::uint64_t arrival_hash = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;  // (variant, axis value, replication) order
    bool tainted = false;        // some run stranded a vehicle
};

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

SweepResult run_sweep(const SweepSpec& spec, const SweepProgress& progress = {});

// Fixed column order; see kRowColumns.
extern const std::vector<std::string> kRowColumns;
std::string rows_csv(const SweepResult& r);
// Per (variant, axis value): mean and 95% normal-approximation half width of
// each metric over replications.
std::string aggregate_csv(const SweepResult& r);

// Minimal CSV reader for the files written above.
class CsvTable {
public:
    static CsvTable parse(std::istream& in);
    static CsvTable parse(const std::string& text);
    static CsvTable load(const std::string& path);

    const std::vector<std::string>& header() const noexcept { return header_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool has(const std::string& column) const;
    std::size_t column(const std::string& name) const;  // SpecError when missing
    const std::string& at(std::size_t row, const std::string& column) const;
    double number(std::size_t row, const std::string& column) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// --- trend expectations --------------------------------------------------

enum class ExpectationKind { Monotone, Ordering, Convergence };

struct Expectation {
    std::string name;
    ExpectationKind kind = ExpectationKind::Monotone;
    std::string metric;
    bool hard = true;  // soft expectations warn instead of failing

    // Monotone / Convergence
    std::string variant = "base";
    bool increasing = false;
    double rho_bound = -0.9;  // rho <= bound when decreasing, >= when increasing

    // Ordering: b is `lower` (or higher) than a at >= min_count axis values
    std::string a;
    std::string b;
    bool b_lower = true;
    int min_count = 0;
    double min_fraction = 0.0;

    // Convergence
    double eps = 0.05;
    int window_lo = 0;
    int window_hi = 0;
};

std::vector<Expectation> expectations_from_json(const nlohmann::json& j);  // SpecError

struct Verdict {
    std::string name;
    bool pass = false;
    bool hard = true;
    double value = 0.0;  // rho, agreeing count or convergence point
    std::string detail;
};

// Pure function of the table: per-cell means over replications, then each
// expectation. PairingError if compared arms were not run on common seeds.
std::vector<Verdict> check_trends(const CsvTable& table, const std::vector<Expectation>& expectations);
std::string format_verdict(const Verdict& v);

// --- calibration -----------------------------------------------------------

struct CalibrationGrid {
    std::vector<double> means;  // base mean inter-arrival, seconds, heaviest demand first
    std::vector<int> chargers;  // chargers per station
    std::vector<int> fleet_values{5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    std::vector<int> station_values{1, 2, 3, 4, 5, 6, 7, 8};
    int fleet_lo = 9, fleet_hi = 13, fleet_anchor = 11;
    int station_lo = 4, station_hi = 6, station_anchor = 5;
    int station_sweep_fleet = 11;
    int fleet_sweep_stations = 8;
    double eps = 0.05;
    int replications = 10;
    std::vector<std::uint64_t> seeds;
    int jobs = 1;
};

struct CalibrationCandidate {
    double mean = 0.0;
    int chargers = 0;
    int fleet_knee = 0;
    int station_knee = 0;
    bool feasible = false;
    int distance = 0;  // |fleet_knee - anchor| + |station_knee - anchor|
};

struct CalibrationResult {
    std::vector<CalibrationCandidate> candidates;
    CalibrationCandidate chosen;
    ScenarioConfig config;  // base with the chosen values and provenance notes
};

// Grid search in grid order (means outer, chargers inner); the first cell
// with both knees inside their windows wins, so list means from heaviest
// demand down. CalibrationError naming the nearest miss otherwise.
CalibrationResult calibrate(const ScenarioConfig& base, const CalibrationGrid& grid,
                            const SweepProgress& progress = {});

}  // namespace etaxi
