// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace evtherm {

/// Deterministic random source for all stochastic parts of the toolkit.
///
/// Every distribution is built on the raw mt19937_64 output stream, whose
/// bit sequence is fully pinned by the C++ standard. The standard library
/// distribution adaptors are implementation-defined and are deliberately
/// not used, so a given seed reproduces the same draws on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Normal draw via Box-Muller; consumes exactly two uniforms per call.
    double normal(double mean, double stddev);

    /// Uniform integer in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n);

    /// Poisson-distributed count (Knuth multiplication method).
    unsigned poisson(double rate);

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[uniform_index(i)]);
        }
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

}  // namespace evtherm
