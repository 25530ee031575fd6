#include "etaxi/rng.hpp"

#include <cmath>
#include <numbers>

namespace etaxi {

std::string_view stream_name(StreamId id) {
    switch (id) {
        case StreamId::DemandTiming: return "demand-timing";
        case StreamId::DemandOd: return "demand-od";
        case StreamId::ServiceNoise: return "service-noise";
        case StreamId::TieSalt: return "tie-salt";
    }
    return "unknown";
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    if (n <= 1) return 0;
    // Rejection keeps the index exactly uniform.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
}

double RngStream::normal(double mean, double stddev) {
    // Box-Muller, cosine branch only: exactly two draws per variate.
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

std::uint64_t RngStreams::stream_seed(std::uint64_t master_seed, std::string_view name) {
    return splitmix64(master_seed ^ fnv1a64(name));
}

RngStreams::RngStreams(std::uint64_t master_seed) : master_seed_(master_seed) {
    for (int i = 0; i < kStreamCount; ++i) {
        const auto id = static_cast<StreamId>(i);
        streams_[static_cast<std::size_t>(i)] = RngStream(stream_seed(master_seed, stream_name(id)));
    }
}

}  // namespace etaxi
