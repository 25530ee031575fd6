#include "etaxi/metrics.hpp"

#include "etaxi/errors.hpp"
#include "etaxi/fleet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace etaxi {

namespace {

enum Stage { kWaiting = 0, kAssigned = 1, kAboard = 2, kDone = 3, kRental = 4, kCancelled = 5 };

std::string where(const LogRecord& r) {
    return std::string(to_string(r.kind)) + " at t=" + std::to_string(r.time);
}

}  // namespace

const MetricsAccumulator::TaxiTrack& MetricsAccumulator::taxi(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= taxis_.size()) throw LogError("unknown taxi " + std::to_string(id));
    return taxis_[static_cast<std::size_t>(id)];
}

MetricsAccumulator::TaxiTrack& MetricsAccumulator::taxi(int id) {
    return const_cast<TaxiTrack&>(std::as_const(*this).taxi(id));
}

MetricsAccumulator::RequestTrack& MetricsAccumulator::request(int id) {
    if (id < 0 || static_cast<std::size_t>(id) >= requests_.size())
        throw LogError("unknown request " + std::to_string(id));
    return requests_[static_cast<std::size_t>(id)];
}

void MetricsAccumulator::close_state(TaxiTrack& t, double now) {
    const auto s = static_cast<TaxiState>(t.state);
    if (is_idle_state(s)) idle_closed_ += now - t.since;
    if (is_charging_state(s)) charge_closed_ += now - t.since;
}

void MetricsAccumulator::open_state(TaxiTrack& t, int state, double now) {
    if (state < 0 || state >= kTaxiStateCount) throw LogError("bad taxi state " + std::to_string(state));
    t.state = state;
    t.since = now;
}

void MetricsAccumulator::add(const LogRecord& r) {
    if (r.time < last_time_) throw LogError("log time went backwards: " + where(r));
    last_time_ = r.time;
    switch (r.kind) {
        case LogKind::TaxiSpawned: {
            if (r.a != static_cast<int>(taxis_.size())) throw LogError("taxi ids must be sequential: " + where(r));
            taxis_.emplace_back();
            open_state(taxis_.back(), r.c, r.time);
            ++counts_.vehicles;
            break;
        }
        case LogKind::TaxiState: {
            TaxiTrack& t = taxi(r.a);
            if (t.state != r.b) throw LogError("state transition from a state the taxi is not in: " + where(r));
            close_state(t, r.time);
            open_state(t, r.c, r.time);
            break;
        }
        case LogKind::RequestSpawned: {
            if (r.a != static_cast<int>(requests_.size()))
                throw LogError("request ids must be sequential: " + where(r));
            requests_.push_back({r.time, kWaiting});
            unpicked_.push_back(r.a);
            ++counts_.requests;
            break;
        }
        case LogKind::RequestAssigned:
        case LogKind::RequestPooled: {
            RequestTrack& q = request(r.a);
            if (q.stage != kWaiting) throw LogError("assignment of a request that is not waiting: " + where(r));
            q.stage = kAssigned;
            if (r.kind == LogKind::RequestPooled) ++counts_.pooled_rides;
            break;
        }
        case LogKind::RequestPickedUp: {
            RequestTrack& q = request(r.a);
            if (q.stage != kAssigned) throw LogError("pickup of an unassigned request: " + where(r));
            q.stage = kAboard;
            std::erase(unpicked_, r.a);
            wait_closed_ += r.time - q.call;
            ++wait_closed_count_;
            ++counts_.pickups;
            break;
        }
        case LogKind::RequestDelivered: {
            RequestTrack& q = request(r.a);
            if (q.stage != kAboard) throw LogError("delivery before pickup: " + where(r));
            q.stage = kDone;
            ++counts_.deliveries;
            break;
        }
        case LogKind::RequestCancelled: {
            RequestTrack& q = request(r.a);
            if (q.stage != kWaiting) throw LogError("cancel of a request that is not waiting: " + where(r));
            q.stage = kCancelled;
            std::erase(unpicked_, r.a);
            ++counts_.cancelled;
            break;
        }
        case LogKind::RentalStarted: {
            RequestTrack& q = request(r.a);
            if (q.stage != kWaiting) throw LogError("rental for a request that is not waiting: " + where(r));
            q.stage = kRental;
            std::erase(unpicked_, r.a);
            ++counts_.rental_trips;
            break;
        }
        case LogKind::RentalEnded: {
            RequestTrack& q = request(r.a);
            if (q.stage != kRental) throw LogError("rental end without start: " + where(r));
            q.stage = kDone;
            ++counts_.deliveries;
            break;
        }
        case LogKind::StationArrived: {
            taxi(r.a);
            if (at_station_.count(r.a)) throw LogError("taxi arrived at a station twice: " + where(r));
            at_station_[r.a] = 1;
            queued_since_[r.a] = r.time;
            ++counts_.charge_visits;
            break;
        }
        case LogKind::StationAdmitted: {
            auto it = at_station_.find(r.a);
            if (it == at_station_.end() || it->second != 1) throw LogError("admission without arrival: " + where(r));
            it->second = 2;
            queue_closed_ += r.time - queued_since_[r.a];
            queued_since_.erase(r.a);
            break;
        }
        case LogKind::StationDeparted: {
            auto it = at_station_.find(r.a);
            if (it == at_station_.end() || it->second != 2) throw LogError("departure without admission: " + where(r));
            at_station_.erase(it);
            break;
        }
        case LogKind::MetricsSample:
            series_.push_back(point(r.time));
            break;
        case LogKind::Stranded:
            taxi(r.a);
            ++counts_.stranded;
            break;
        case LogKind::JamChanged:
        case LogKind::CommandApplied:
        case LogKind::PromptIssued:
        case LogKind::PromptResolved:
            break;
    }
}

MetricPoint MetricsAccumulator::point(double t) const {
    MetricPoint p;
    p.time = t;
    double wait = wait_closed_;
    for (int id : unpicked_) wait += t - requests_[static_cast<std::size_t>(id)].call;
    const std::size_t waits = static_cast<std::size_t>(wait_closed_count_) + unpicked_.size();
    p.passenger_avg_wait = waits ? wait / static_cast<double>(waits) : 0.0;

    double idle = idle_closed_;
    for (const auto& tk : taxis_)
        if (is_idle_state(static_cast<TaxiState>(tk.state))) idle += t - tk.since;
    p.taxi_avg_idle = taxis_.empty() ? 0.0 : idle / static_cast<double>(taxis_.size());

    double queue = queue_closed_;
    // Iterate in taxi order so the sum does not depend on hash layout.
    std::vector<std::pair<int, double>> open(queued_since_.begin(), queued_since_.end());
    std::sort(open.begin(), open.end());
    for (const auto& [id, since] : open) queue += t - since;
    p.taxi_avg_queue_wait = counts_.charge_visits ? queue / counts_.charge_visits : 0.0;
    return p;
}

MetricsReport MetricsAccumulator::report(double horizon) const {
    if (horizon < last_time_) throw LogError("report horizon precedes the last log record");
    MetricsReport out = counts_;
    out.horizon = horizon;
    const MetricPoint p = point(horizon);
    out.passenger_avg_wait = p.passenger_avg_wait;
    out.taxi_avg_idle = p.taxi_avg_idle;
    out.taxi_avg_queue_wait = p.taxi_avg_queue_wait;
    out.waits_counted = wait_closed_count_ + static_cast<int>(unpicked_.size());

    double idle = idle_closed_ + charge_closed_;
    for (const auto& tk : taxis_) {
        const auto s = static_cast<TaxiState>(tk.state);
        if (is_idle_state(s) || is_charging_state(s)) idle += horizon - tk.since;
    }
    out.taxi_avg_idle_incl_charging = taxis_.empty() ? 0.0 : idle / static_cast<double>(taxis_.size());
    out.series = series_;
    return out;
}

MetricsReport ingest(std::span<const LogRecord> log, double horizon) {
    MetricsAccumulator acc;
    for (const auto& r : log) acc.add(r);
    return acc.report(horizon);
}

int convergence_point(std::span<const int> sizes, std::span<const double> values, double eps) {
    if (sizes.size() != values.size() || sizes.size() < 3)
        throw SpecError("convergence_point needs at least three (size, value) points");
    const std::size_t n = values.size();
    std::vector<char> ok(n, 1);  // ok[j]: pair (j, j+1) is below eps
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double rel = values[j] == 0.0 ? 0.0 : (values[j] - values[j + 1]) / values[j];
        ok[j] = rel < eps;
    }
    // smallest start s such that every pair from s on is ok
    std::size_t s = n - 1;
    while (s > 0 && ok[s - 1]) --s;
    return sizes[s];
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw SpecError("spearman needs two equal series of length >= 2");
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

TrendReport trend_stats(std::span<const int> sizes_a, std::span<const double> a, std::span<const int> sizes_b,
                        std::span<const double> b) {
    if (sizes_a.size() != a.size() || sizes_b.size() != b.size())
        throw PairingError("size and value columns differ in length");
    if (!std::equal(sizes_a.begin(), sizes_a.end(), sizes_b.begin(), sizes_b.end()))
        throw PairingError("paired runs do not share a sweep grid");
    TrendReport out;
    out.sizes.assign(sizes_a.begin(), sizes_a.end());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        out.diff.push_back(d);
        if (d < 0) ++out.b_lower;
        else if (d > 0) ++out.b_higher;
        else ++out.ties;
    }
    if (a.size() >= 2) {
        std::vector<double> xs(sizes_a.begin(), sizes_a.end());
        out.spearman_a = spearman(xs, a);
        out.spearman_b = spearman(xs, b);
    }
    return out;
}

}  // namespace etaxi
