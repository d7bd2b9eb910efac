/**
 * rng.hpp - seeded generator with platform-independent derived distributions
 *
 * The standard library's distribution objects are implementation-defined, so
 * uniform and normal variates are derived here directly from mt19937_64 output.
 */
#pragma once

#include <cstdint>
#include <random>

namespace hdru {

/// splitmix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0,1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    double normal(double mean = 0.0, double stddev = 1.0);
    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace hdru
