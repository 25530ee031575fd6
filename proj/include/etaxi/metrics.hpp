#pragma once

#include "etaxi/event_log.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace etaxi {

struct MetricPoint {
    double time = 0.0;
    double passenger_avg_wait = 0.0;
    double taxi_avg_idle = 0.0;
    double taxi_avg_queue_wait = 0.0;
    friend bool operator==(const MetricPoint&, const MetricPoint&) = default;
};

struct MetricsReport {
    double horizon = 0.0;
    double passenger_avg_wait = 0.0;   // seconds; censored waits count to the horizon
    double taxi_avg_idle = 0.0;        // seconds per vehicle
    double taxi_avg_queue_wait = 0.0;  // seconds per charging visit
    double taxi_avg_idle_incl_charging = 0.0;

    int requests = 0;
    int deliveries = 0;  // taxi and rental trips completed
    int pickups = 0;
    int cancelled = 0;
    int charge_visits = 0;
    int pooled_rides = 0;
    int rental_trips = 0;
    int stranded = 0;
    int vehicles = 0;
    int waits_counted = 0;  // denominator of passenger_avg_wait

    std::vector<MetricPoint> series;

    std::uint64_t seed = 0;
    std::string config_hash;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Folds log records one at a time; report(t) is valid for any t at or after
// the last record. Throws LogError on records that contradict earlier ones.
class MetricsAccumulator {
public:
    void add(const LogRecord& r);
    MetricsReport report(double horizon) const;

private:
    struct TaxiTrack {
        int state = 0;
        double since = 0.0;
    };
    struct RequestTrack {
        double call = 0.0;
        int stage = 0;  // 0 waiting, 1 assigned, 2 aboard, 3 done, 4 rental, 5 cancelled
    };

    void close_state(TaxiTrack& t, double now);
    void open_state(TaxiTrack& t, int state, double now);
    MetricPoint point(double t) const;
    const TaxiTrack& taxi(int id) const;
    TaxiTrack& taxi(int id);
    RequestTrack& request(int id);

    double last_time_ = 0.0;
    std::vector<TaxiTrack> taxis_;
    std::vector<RequestTrack> requests_;

    double idle_closed_ = 0.0;
    double charge_closed_ = 0.0;

    double wait_closed_ = 0.0;  // sum of pickup - call
    int wait_closed_count_ = 0;
    std::vector<int> unpicked_;  // taxi-served requests not yet picked up

    std::unordered_map<int, double> queued_since_;  // taxi -> arrival at station
    std::unordered_map<int, int> at_station_;        // taxi -> 1 queued, 2 charging
    double queue_closed_ = 0.0;

    MetricsReport counts_;
    std::vector<MetricPoint> series_;
};

MetricsReport ingest(std::span<const LogRecord> log, double horizon);

// Smallest swept size k such that every consecutive relative decrease
// (m[j] - m[j+1]) / m[j] at sizes >= k is below eps; the last size when no
// such k exists. A zero m[j] counts as no decrease.
int convergence_point(std::span<const int> sizes, std::span<const double> values, double eps = 0.05);

// Spearman rank correlation with average ranks for ties; 0 when either side
// is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct TrendReport {
    std::vector<int> sizes;
    std::vector<double> diff;  // b - a per size
    int b_lower = 0;
    int b_higher = 0;
    int ties = 0;
    double spearman_a = 0.0;  // metric vs size
    double spearman_b = 0.0;
};

// Paired comparison over a common size grid; PairingError if the grids differ.
TrendReport trend_stats(std::span<const int> sizes_a, std::span<const double> a, std::span<const int> sizes_b,
                        std::span<const double> b);

}  // namespace etaxi
