#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "wlsim/fft.hpp"
#include "wlsim/grid.hpp"

namespace wlsim {

// One complex-valued function sampled on a SpatialGrid. The discrete L^2
// measure carries the cell volume h^d, so norms and inner products are
// resolution independent.
struct ComplexField {
    SpatialGrid grid;
    std::vector<cx> v;

    ComplexField() = default;

    explicit ComplexField(const SpatialGrid& g) : grid(g), v(g.points(), cx(0.0, 0.0)) {}

    ComplexField(const SpatialGrid& g, std::vector<cx> values) : grid(g), v(std::move(values)) {
        if (v.size() != g.points())
            throw std::invalid_argument("ComplexField: value count does not match grid");
    }

    static ComplexField from_function(const SpatialGrid& g, const std::function<cx(double)>& f) {
        ComplexField out(g);
        for (std::size_t i = 0; i < g.n[0]; ++i) out.v[i] = f(g.coord(0, i));
        return out;
    }

    static ComplexField from_function2(const SpatialGrid& g,
                                       const std::function<cx(double, double)>& f) {
        ComplexField out(g);
        for (std::size_t i0 = 0; i0 < g.n[0]; ++i0)
            for (std::size_t i1 = 0; i1 < g.n[1]; ++i1)
                out.v[g.index(i0, i1)] = f(g.coord(0, i0), g.coord(1, i1));
        return out;
    }

    bool finite() const {
        for (const cx& z : v)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }
};

inline void require_same_grid(const ComplexField& f, const ComplexField& g) {
    if (f.grid != g.grid) throw GridMismatchError("fields live on different grids");
}

// <f, g> = sum conj(f) g * h^d, conjugate-linear in the first slot. This is
// the one fixed convention of the whole code base: with it the Wigner kernel
// conj(psi)(x+y/2) phi(x-y/2) integrates back to exactly this inner product.
inline cx inner_product(const ComplexField& f, const ComplexField& g) {
    require_same_grid(f, g);
    const std::size_t n = f.v.size();
    std::vector<cx> terms(n);
    for (std::size_t i = 0; i < n; ++i) terms[i] = std::conj(f.v[i]) * g.v[i];
    return pairwise_sum(std::span<const cx>(terms)) * f.grid.cell();
}

inline double l2_norm_sq(const ComplexField& f) {
    const std::size_t n = f.v.size();
    std::vector<double> terms(n);
    for (std::size_t i = 0; i < n; ++i) terms[i] = std::norm(f.v[i]);
    return pairwise_sum(std::span<const double>(terms)) * f.grid.cell();
}

inline double l2_norm(const ComplexField& f) { return std::sqrt(l2_norm_sq(f)); }

namespace detail {

// In-place forward/inverse FFT over every axis of the field.
inline void fft_all_axes(const SpatialGrid& g, std::vector<cx>& v, bool forward) {
    std::vector<cx> scratch;
    if (g.dim == 1) {
        forward ? fft::forward(v.data(), g.n[0]) : fft::inverse(v.data(), g.n[0]);
        return;
    }
    const std::size_t n0 = g.n[0], n1 = g.n[1];
    for (std::size_t i0 = 0; i0 < n0; ++i0) {
        cx* row = v.data() + i0 * n1;
        forward ? fft::forward(row, n1) : fft::inverse(row, n1);
    }
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        cx* col = v.data() + i1;
        forward ? fft::forward_strided(col, n0, n1, scratch)
                : fft::inverse_strided(col, n0, n1, scratch);
    }
}

}  // namespace detail

inline std::vector<cx> spectrum(const ComplexField& f) {
    std::vector<cx> s = f.v;
    detail::fft_all_axes(f.grid, s, true);
    return s;
}

inline ComplexField from_spectrum(const SpatialGrid& g, std::vector<cx> s) {
    detail::fft_all_axes(g, s, false);
    return ComplexField(g, std::move(s));
}

// Exact derivative of the trigonometric interpolant along each axis. The
// Nyquist bin is zeroed (the symmetric convention that keeps derivatives of
// real fields real).
inline std::vector<ComplexField> spectral_gradient(const ComplexField& f) {
    const SpatialGrid& g = f.grid;
    std::vector<cx> s = spectrum(f);
    std::vector<ComplexField> out;
    out.reserve(g.dim);
    for (int d = 0; d < g.dim; ++d) {
        std::vector<cx> sd(s.size());
        for (std::size_t i0 = 0; i0 < g.n[0]; ++i0) {
            for (std::size_t i1 = 0; i1 < g.n[1]; ++i1) {
                const std::size_t idx = g.index(i0, i1);
                const std::size_t bin = (d == 0) ? i0 : i1;
                double k = g.wavenumber(d, bin);
                if (bin == g.n[d] / 2) k = 0.0;  // Nyquist
                sd[idx] = cx(0.0, k) * s[idx];
            }
        }
        out.push_back(from_spectrum(g, std::move(sd)));
    }
    return out;
}

inline ComplexField laplacian(const ComplexField& f) {
    const SpatialGrid& g = f.grid;
    std::vector<cx> s = spectrum(f);
    for (std::size_t i0 = 0; i0 < g.n[0]; ++i0) {
        for (std::size_t i1 = 0; i1 < g.n[1]; ++i1) {
            const std::size_t idx = g.index(i0, i1);
            double k2 = g.wavenumber(0, i0) * g.wavenumber(0, i0);
            if (g.dim == 2) k2 += g.wavenumber(1, i1) * g.wavenumber(1, i1);
            s[idx] *= -k2;
        }
    }
    return from_spectrum(g, std::move(s));
}

inline double h1_norm_sq(const ComplexField& f) {
    double s = l2_norm_sq(f);
    for (const ComplexField& d : spectral_gradient(f)) s += l2_norm_sq(d);
    return s;
}

inline double h1_norm(const ComplexField& f) { return std::sqrt(h1_norm_sq(f)); }

inline double l2_distance(const ComplexField& f, const ComplexField& g) {
    require_same_grid(f, g);
    std::vector<double> terms(f.v.size());
    for (std::size_t i = 0; i < f.v.size(); ++i) terms[i] = std::norm(f.v[i] - g.v[i]);
    return std::sqrt(pairwise_sum(std::span<const double>(terms)) * f.grid.cell());
}

inline ComplexField normalized(ComplexField f) {
    const double nrm = l2_norm(f);
    if (!(nrm > 0.0)) throw std::invalid_argument("normalized: zero field");
    for (cx& z : f.v) z /= nrm;
    return f;
}

}  // namespace wlsim
