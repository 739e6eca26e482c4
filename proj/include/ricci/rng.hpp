#pragma once

#include <cstdint>
#include <random>

namespace ricci {

// Seeded RNG used across the library. All randomness flows through one of
// these so runs are reproducible from a single integer seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal(double mean = 0.0, double sd = 1.0) {
        return std::normal_distribution<double>(mean, sd)(engine_);
    }
    // Uniform integer in [lo, hi] inclusive.
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }
    std::mt19937_64& engine() { return engine_; }
    std::uint64_t seed() const { return seed_; }

    // Derive an independent stream (e.g. per epoch) without disturbing this one.
    Rng fork(std::uint64_t salt) const { return Rng(mix(seed_ ^ mix(salt))); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace ricci
