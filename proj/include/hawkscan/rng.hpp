#pragma once

#include <cmath>
#include <cstdint>

#include "hawkscan/normal.hpp"

namespace hawkscan {

/// Counter-based pseudo-random generator (SplitMix64 output function over an
/// affine counter). Replicate k of a run keyed by (seed, k) produces the same
/// stream no matter which thread executes it or in what order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(mix(seed + 0x9E3779B97F4A7C15ULL) ^
                     mix(stream + 0xD1B54A32D192ED03ULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform on [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1): never returns an exact endpoint.
    double next_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via inverse CDF (deterministic across platforms).
    double next_gauss() { return normal_quantile(next_open()); }

    /// Exponential with the given rate.
    double next_exp(double rate) { return -std::log(next_open()) / rate; }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace hawkscan
