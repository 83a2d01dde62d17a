#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "wlsim/common.hpp"
#include "wlsim/util.hpp"

namespace wlsim::fft {

// Iterative radix-2 complex FFT for power-of-two lengths. Grids in this
// project are powers of two by construction, so a general-length transform is
// not needed; owning the kernel keeps runs bit-reproducible across builds.
//
// Conventions:
//   forward(a)[k] = sum_j a[j] exp(-2*pi*i*j*k/n)        (unscaled)
//   inverse(a)[j] = (1/n) sum_k a[k] exp(+2*pi*i*j*k/n)  (scaled)

namespace detail {

struct Plan {
    std::vector<std::uint32_t> rev;  // bit-reversal permutation
    std::vector<cx> tw;              // exp(-2*pi*i*j/n), j < n/2
};

inline const Plan& plan_for(std::size_t n) {
    static std::map<std::size_t, Plan> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Plan p;
    p.rev.resize(n);
    p.rev[0] = 0;
    for (std::size_t i = 1; i < n; ++i)
        p.rev[i] = (p.rev[i >> 1] >> 1) | static_cast<std::uint32_t>((i & 1) * (n >> 1));
    p.tw.resize(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double ang = -2.0 * kPi * static_cast<double>(j) / static_cast<double>(n);
        p.tw[j] = cx(std::cos(ang), std::sin(ang));
    }
    return cache.emplace(n, std::move(p)).first->second;
}

inline void transform(cx* a, std::size_t n, bool forward) {
    if (n <= 1) return;
    const Plan& p = plan_for(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = p.rev[i];
        if (i < r) std::swap(a[i], a[r]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t step = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t j = 0; j < half; ++j) {
                cx w = p.tw[j * step];
                if (!forward) w = std::conj(w);
                const cx u = a[base + j];
                const cx t = a[base + j + half] * w;
                a[base + j] = u + t;
                a[base + j + half] = u - t;
            }
        }
    }
}

}  // namespace detail

inline void forward(cx* a, std::size_t n) { detail::transform(a, n, true); }

inline void inverse_unscaled(cx* a, std::size_t n) { detail::transform(a, n, false); }

inline void inverse(cx* a, std::size_t n) {
    detail::transform(a, n, false);
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) a[i] *= s;
}

inline void forward(std::vector<cx>& a) { forward(a.data(), a.size()); }
inline void inverse(std::vector<cx>& a) { inverse(a.data(), a.size()); }

// Strided transform (gather/transform/scatter through a scratch buffer);
// used for the slow axis of 2D arrays.
inline void forward_strided(cx* a, std::size_t n, std::size_t stride, std::vector<cx>& scratch) {
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) scratch[i] = a[i * stride];
    forward(scratch.data(), n);
    for (std::size_t i = 0; i < n; ++i) a[i * stride] = scratch[i];
}

inline void inverse_strided(cx* a, std::size_t n, std::size_t stride, std::vector<cx>& scratch) {
    scratch.resize(n);
    for (std::size_t i = 0; i < n; ++i) scratch[i] = a[i * stride];
    inverse(scratch.data(), n);
    for (std::size_t i = 0; i < n; ++i) a[i * stride] = scratch[i];
}

}  // namespace wlsim::fft
