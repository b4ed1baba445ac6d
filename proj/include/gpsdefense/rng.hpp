// Seeded random streams. Every consumer derives its own substream from the
// scenario seed so adding a draw in one sensor never shifts another.
#pragma once

#include <cstdint>
#include <random>

namespace gpsdefense {

/// SplitMix64 finalizer; used to derive well-separated substream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream + 0x5851F42D4C957F2DULL));
}

/// Fixed stream identifiers so that seeds stay stable as code evolves.
enum class Stream : std::uint64_t {
    imu = 1,
    gps = 2,
    rsu = 3,
    attack = 4,
    forest = 5,
    trajectory = 6,
};

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    Rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
        : engine_(substream_seed(substream_seed(seed, static_cast<std::uint64_t>(stream)), index)) {}

    double normal(double mean = 0.0, double sigma = 1.0) {
        if (sigma == 0.0) return mean;
        return std::normal_distribution<double>(mean, sigma)(engine_);
    }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }

    /// Uniform integer in [lo, hi].
    std::size_t index(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace gpsdefense
