// SPDX-License-Identifier: Apache-2.0
#include "evtherm/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace evtherm {

double Rng::normal(double mean, double stddev) {
    // Box-Muller on (0,1] x [0,1); the second variate of the pair is unused
    // so that the stream position depends only on the number of calls.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
    // Lemire multiply-shift with rejection for exact uniformity.
    const std::uint64_t range = n;
    std::uint64_t x = engine_();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < range) {
        const std::uint64_t threshold = -range % range;
        while (lo < threshold) {
            x = engine_();
            m = static_cast<__uint128_t>(x) * range;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

unsigned Rng::poisson(double rate) {
    if (rate < 0.0 || !std::isfinite(rate)) {
        throw std::invalid_argument("poisson: rate must be finite and >= 0");
    }
    if (rate == 0.0) return 0;
    const double limit = std::exp(-rate);
    unsigned count = 0;
    double product = uniform();
    while (product > limit) {
        ++count;
        product *= uniform();
    }
    return count;
}

}  // namespace evtherm
