#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "wlsim/common.hpp"

namespace wlsim {

// Deterministic blocked pairwise summation. Fixed association order, so the
// result depends only on the sequence of values.
inline double pairwise_sum(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n <= 32) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

inline cx pairwise_sum(std::span<const cx> v) {
    const std::size_t n = v.size();
    if (n <= 32) {
        cx s = 0.0;
        for (const cx& x : v) s += x;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

namespace detail {
// Map a double onto a totally ordered unsigned key (sign-magnitude flip).
inline std::uint64_t order_key(double x) {
    const auto u = std::bit_cast<std::uint64_t>(x);
    return (u & 0x8000000000000000ull) ? ~u : (u | 0x8000000000000000ull);
}
}  // namespace detail

// Sum of a small set of doubles in a canonical value-derived order. Two calls
// with the same multiset of values produce bitwise-identical results, which is
// what makes oscillator-tuple reductions permutation-equivariant at the bit
// level (inner sums over k must not depend on how the tuple is labeled).
inline double canonical_sum(std::span<const double> v) {
    std::array<double, 16> buf;
    if (v.size() <= 2) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    if (v.size() <= buf.size()) {
        std::copy(v.begin(), v.end(), buf.begin());
        std::sort(buf.begin(), buf.begin() + v.size(),
                  [](double a, double b) { return detail::order_key(a) < detail::order_key(b); });
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += buf[i];
        return s;
    }
    std::vector<double> big(v.begin(), v.end());
    std::sort(big.begin(), big.end(),
              [](double a, double b) { return detail::order_key(a) < detail::order_key(b); });
    double s = 0.0;
    for (double x : big) s += x;
    return s;
}

inline cx canonical_sum(std::span<const cx> v) {
    std::array<cx, 16> buf;
    if (v.size() <= 2) {
        cx s = 0.0;
        for (const cx& x : v) s += x;
        return s;
    }
    auto less = [](const cx& a, const cx& b) {
        const auto ka = detail::order_key(a.real()), kb = detail::order_key(b.real());
        if (ka != kb) return ka < kb;
        return detail::order_key(a.imag()) < detail::order_key(b.imag());
    };
    if (v.size() <= buf.size()) {
        std::copy(v.begin(), v.end(), buf.begin());
        std::sort(buf.begin(), buf.begin() + v.size(), less);
        cx s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += buf[i];
        return s;
    }
    std::vector<cx> big(v.begin(), v.end());
    std::sort(big.begin(), big.end(), less);
    cx s = 0.0;
    for (const cx& x : big) s += x;
    return s;
}

// SplitMix64: tiny, fully pinned PRNG so that seeded scenarios are
// bit-reproducible independent of the standard library's distributions.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller.
    double gauss() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    cx gauss_cx() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }
};

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// FNV-1a, used for scenario hashes in run directory names and manifests.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace wlsim
