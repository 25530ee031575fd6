#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

namespace etaxi {

enum class StreamId : int { DemandTiming = 0, DemandOd = 1, ServiceNoise = 2, TieSalt = 3 };
inline constexpr int kStreamCount = 4;

std::string_view stream_name(StreamId id);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t splitmix64(std::uint64_t x);

// One named substream. mt19937_64 output is fixed by the standard; the
// uniform/normal transforms are implemented here so draws are identical
// across standard libraries.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() {
        ++draws_;
        return engine_();
    }
    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    double normal(double mean, double stddev);

    std::uint64_t draws() const noexcept { return draws_; }

private:
    std::mt19937_64 engine_{0};
    std::uint64_t draws_ = 0;
};

// Independent substreams keyed by name; each is seeded from
// splitmix64(master_seed ^ fnv1a(name)).
class RngStreams {
public:
    explicit RngStreams(std::uint64_t master_seed = 0);

    RngStream& get(StreamId id) { return streams_[static_cast<std::size_t>(id)]; }
    const RngStream& get(StreamId id) const { return streams_[static_cast<std::size_t>(id)]; }
    std::uint64_t master_seed() const noexcept { return master_seed_; }

    static std::uint64_t stream_seed(std::uint64_t master_seed, std::string_view name);

private:
    std::uint64_t master_seed_;
    std::array<RngStream, kStreamCount> streams_;
};

}  // namespace etaxi
