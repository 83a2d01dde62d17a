#pragma once

#include <cmath>
#include <vector>

#include "wlsim/field.hpp"
#include "wlsim/util.hpp"

namespace wlsim {

// Initial-condition presets. All of them return grid-normalized fields.

// Displaced, optionally boosted Gaussians: psi_i ~ exp(-(x-c_i)^2/(2 a_i^2))
// * exp(i(phi_i + p_i (x - c_i))).
inline std::vector<ComplexField> gaussian_offsets(const SpatialGrid& g,
                                                  const std::vector<double>& centers,
                                                  const std::vector<double>& widths,
                                                  const std::vector<double>& phases,
                                                  const std::vector<double>& boosts = {}) {
    if (g.dim != 1) throw std::invalid_argument("gaussian_offsets: 1-d preset");
    const std::size_t N = centers.size();
    if (widths.size() != N || phases.size() != N || (!boosts.empty() && boosts.size() != N))
        throw std::invalid_argument("gaussian_offsets: parameter arrays must have equal length");
    std::vector<ComplexField> out;
    for (std::size_t i = 0; i < N; ++i) {
        const double c = centers[i], a = widths[i], ph = phases[i];
        const double p0 = boosts.empty() ? 0.0 : boosts[i];
        ComplexField f = ComplexField::from_function(g, [&](double x) {
            const double u = g.periodic_delta(0, x, c);
            return std::polar(std::exp(-u * u / (2.0 * a * a)), ph + p0 * u);
        });
        out.push_back(normalized(std::move(f)));
    }
    return out;
}

// Space-homogeneous tuple psi_i = e^{-i theta_i} / sqrt(L^d).
inline std::vector<ComplexField> homogeneous(const SpatialGrid& g,
                                             const std::vector<double>& thetas) {
    double vol = g.length[0];
    if (g.dim == 2) vol *= g.length[1];
    const double amp = 1.0 / std::sqrt(vol);
    std::vector<ComplexField> out;
    for (double th : thetas) {
        ComplexField f(g);
        const cx val = std::polar(amp, -th);
        for (cx& z : f.v) z = val;
        out.push_back(std::move(f));
    }
    return out;
}

// Band-limited random fields: Gaussian spectral coefficients damped by
// exp(-(k * scale)^2), normalized. `scale` is the smoothness length.
inline ComplexField random_field(const SpatialGrid& g, Rng& rng, double scale) {
    std::vector<cx> spec(g.points());
    for (std::size_t i0 = 0; i0 < g.n[0]; ++i0)
        for (std::size_t i1 = 0; i1 < g.n[1]; ++i1) {
            double k2 = g.wavenumber(0, i0) * g.wavenumber(0, i0);
            if (g.dim == 2) k2 += g.wavenumber(1, i1) * g.wavenumber(1, i1);
            const double damp = std::exp(-k2 * scale * scale);
            spec[g.index(i0, i1)] = rng.gauss_cx() * damp;
        }
    // keep the Nyquist bins empty
    for (std::size_t i0 = 0; i0 < g.n[0]; ++i0)
        for (std::size_t i1 = 0; i1 < g.n[1]; ++i1)
            if (i0 == g.n[0] / 2 || (g.dim == 2 && i1 == g.n[1] / 2)) spec[g.index(i0, i1)] = 0.0;
    return normalized(from_spectrum(g, std::move(spec)));
}

inline std::vector<ComplexField> random_tuple(const SpatialGrid& g, std::size_t N,
                                              std::uint64_t seed, double scale) {
    Rng rng(seed);
    std::vector<ComplexField> out;
    for (std::size_t i = 0; i < N; ++i) out.push_back(random_field(g, rng, scale));
    return out;
}

namespace detail {

// Upper-triangular Cholesky factor R with R^H R = G for a Hermitian positive
// semidefinite G (tiny N, no pivoting). Semidefinite targets (e.g. an
// identical pair, |z| = 1) produce zero pivots and exact field copies.
inline std::vector<cx> cholesky_upper(const std::vector<cx>& G, std::size_t N) {
    std::vector<cx> R(N * N, cx(0.0, 0.0));
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i; j < N; ++j) {
            cx s = G[i * N + j];
            for (std::size_t k = 0; k < i; ++k) s -= std::conj(R[k * N + i]) * R[k * N + j];
            if (i == j) {
                if (s.real() < -1e-12 || std::abs(s.imag()) > 1e-12)
                    throw std::invalid_argument(
                        "gram preset: target matrix is not positive semidefinite");
                R[i * N + i] = std::sqrt(std::max(s.real(), 0.0));
            } else {
                const double pivot = R[i * N + i].real();
                if (pivot <= 1e-13) {
                    if (std::abs(s) > 1e-10)
                        throw std::invalid_argument(
                            "gram preset: target matrix is not positive semidefinite");
                    R[i * N + j] = 0.0;
                } else {
                    R[i * N + j] = s / pivot;
                }
            }
        }
    }
    return R;
}

}  // namespace detail

// Tuple with a prescribed Gram matrix G_jk = <psi_j, psi_k> (exact on the
// grid): discretely orthonormalized Hermite-Gauss modes around `center` with
// width `a`, mixed by the Cholesky factor of G. An optional common momentum
// boost leaves the Gram matrix untouched.
inline std::vector<ComplexField> gram_tuple(const SpatialGrid& g, const std::vector<cx>& G,
                                            std::size_t N, double center, double a,
                                            double boost = 0.0) {
    if (g.dim != 1) throw std::invalid_argument("gram_tuple: 1-d preset");
    for (std::size_t j = 0; j < N; ++j) {
        if (std::abs(G[j * N + j] - cx(1.0, 0.0)) > 1e-12)
            throw std::invalid_argument("gram preset: diagonal entries must be 1");
        for (std::size_t k = 0; k < N; ++k)
            if (std::abs(G[j * N + k] - std::conj(G[k * N + j])) > 1e-12)
                throw std::invalid_argument("gram preset: matrix must be Hermitian");
    }

    // Hermite-Gauss ladder, orthonormalized on the grid (twice, for round-off).
    std::vector<ComplexField> modes;
    for (std::size_t m = 0; m < N; ++m) {
        ComplexField f = ComplexField::from_function(g, [&](double x) {
            const double u = g.periodic_delta(0, x, center) / a;
            double h = 1.0;  // Hermite polynomial H_m(u), recurrence
            if (m >= 1) {
                double hm1 = 1.0, hm = 2.0 * u;
                for (std::size_t q = 2; q <= m; ++q) {
                    const double hn = 2.0 * u * hm - 2.0 * (static_cast<double>(q) - 1.0) * hm1;
                    hm1 = hm;
                    hm = hn;
                }
                h = hm;
            }
            return cx(h * std::exp(-0.5 * u * u), 0.0) * std::polar(1.0, boost * u * a);
        });
        for (int pass = 0; pass < 2; ++pass)
            for (const ComplexField& prev : modes) {
                const cx ov = inner_product(prev, f);
                for (std::size_t i = 0; i < f.v.size(); ++i) f.v[i] -= ov * prev.v[i];
            }
        modes.push_back(normalized(std::move(f)));
    }

    const std::vector<cx> R = detail::cholesky_upper(G, N);
    std::vector<ComplexField> out;
    for (std::size_t i = 0; i < N; ++i) {
        ComplexField f(g);
        for (std::size_t m = 0; m <= i; ++m) {
            const cx c = R[m * N + i];
            for (std::size_t q = 0; q < f.v.size(); ++q) f.v[q] += c * modes[m].v[q];
        }
        out.push_back(std::move(f));
    }
    return out;
}

// Two fields with <psi_1, psi_2> = z exactly.
inline std::vector<ComplexField> pair_with_overlap(const SpatialGrid& g, cx z, double center,
                                                   double a, double boost = 0.0) {
    if (std::abs(z) > 1.0)
        throw std::invalid_argument("pair_with_overlap: |z| must not exceed 1");
    const std::vector<cx> G{cx(1.0, 0.0), z, std::conj(z), cx(1.0, 0.0)};
    return gram_tuple(g, G, 2, center, a, boost);
}

}  // namespace wlsim
