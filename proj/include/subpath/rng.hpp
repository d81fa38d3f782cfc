#pragma once

// Counter-based random streams plus the handful of samplers the project
// needs. Everything here is implemented in-repo on purpose: report bytes
// must not depend on the standard library's unspecified distribution
// algorithms, and parallel runs must be able to hand replica r its own
// stream without any skip-ahead cost.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "subpath/common.hpp"

namespace subpath {

// SplitMix64. The state is a plain counter advanced by a fixed odd gamma,
// the output is a bijective hash of it, so jumping to an arbitrary point
// of the sequence is free.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~std::uint64_t{0}; }

    result_type operator()() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Stream for replica `replica` of a run with seed `seed`, optionally
// namespaced by a purpose tag (tail estimation, main loop, ...) so the
// same seed never reuses counters across phases. Each replica owns a
// 2^21-counter window: replicas are guaranteed disjoint as long as a
// single replica draws fewer than two million variates, which is orders
// of magnitude above anything in this code base.
inline SplitMix64 replica_stream(std::uint64_t seed, std::uint64_t replica,
                                 std::uint64_t purpose = 0) {
    const std::uint64_t base = mix64(seed ^ mix64(purpose + 0x7E46A503B1ull));
    return SplitMix64(base + (replica << 21) * 0x9E3779B97F4A7C15ull);
}

// Uniform on the open interval (0,1): 53-bit mantissa, offset half an ulp
// so neither endpoint can come back (log/pow downstream need that).
template <class Engine>
double uniform01(Engine& g) {
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

template <class Engine>
double exponential_draw(Engine& g) {
    return -std::log(uniform01(g));
}

// Box-Muller, one value per call (the sine partner is discarded; the
// draws per replica are tiny and an uncached sampler keeps the stream
// layout trivial to reason about).
template <class Engine>
double normal_draw(Engine& g) {
    const double r = std::sqrt(-2.0 * std::log(uniform01(g)));
    return r * std::cos(2.0 * std::numbers::pi * uniform01(g));
}

// Marsaglia-Tsang; shape < 1 boosted through shape+1.
template <class Engine>
double gamma_draw(Engine& g, double shape, double scale = 1.0) {
    if (!(shape > 0) || !(scale > 0))
        throw ArgumentError("gamma_draw: shape and scale must be positive");
    if (shape < 1.0) {
        const double u = uniform01(g);
        return gamma_draw(g, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal_draw(g);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(g);
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v))
            return d * v * scale;
    }
}

// Product method; means above 30 are split into chunks so the running
// product cannot underflow. Exact in distribution either way.
template <class Engine>
long long poisson_draw(Engine& g, double mean) {
    if (!(mean >= 0)) throw ArgumentError("poisson_draw: mean must be >= 0");
    if (mean == 0) return 0;
    long long total = 0;
    while (mean > 30.0) {
        double chunk = 30.0;
        double limit = std::exp(-chunk);
        long long k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01(g);
        } while (p > limit);
        total += k - 1;
        mean -= chunk;
    }
    const double limit = std::exp(-mean);
    long long k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= uniform01(g);
    } while (p > limit);
    return total + k - 1;
}

// Kanter's representation of the positive alpha-stable law normalised so
// that E exp(-u X) = exp(-u^alpha):
//
//   X = (A(U)/W)^{(1-alpha)/alpha},   U ~ Uniform(0,pi), W ~ Exp(1),
//   A(u) = sin(alpha u)^{alpha/(1-alpha)} sin((1-alpha) u) / sin(u)^{1/(1-alpha)}.
//
// Evaluated in log space; the sine ratios stay well conditioned on the
// open interval.
template <class Engine>
double positive_stable_draw(Engine& g, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ArgumentError("positive_stable_draw: alpha must lie in (0,1)");
    const double u = std::numbers::pi * uniform01(g);
    const double w = exponential_draw(g);
    const double log_a = (alpha * std::log(std::sin(alpha * u)) +
                          (1.0 - alpha) * std::log(std::sin((1.0 - alpha) * u)) -
                          std::log(std::sin(u))) /
                         (1.0 - alpha);
    return std::exp(((1.0 - alpha) / alpha) * (log_a - std::log(w)));
}

}  // namespace subpath
