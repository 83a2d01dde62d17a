#pragma once

#include <array>
#include <cstddef>
#include <string>

#include "wlsim/common.hpp"
#include "wlsim/util.hpp"

namespace wlsim {

// Uniform periodic box [0, L)^d, d in {1, 2}. Point counts are powers of two
// (>= 8) so every spectral operation stays a radix-2 FFT. The spacing is
// always derived as L/n; no second copy of it is stored.
struct SpatialGrid {
    int dim = 1;
    std::array<std::size_t, 2> n{8, 1};
    std::array<double, 2> length{1.0, 1.0};

    SpatialGrid() = default;

    SpatialGrid(std::size_t n0, double L0) : dim(1), n{n0, 1}, length{L0, 1.0} { validate(); }

    SpatialGrid(std::size_t n0, double L0, std::size_t n1, double L1)
        : dim(2), n{n0, n1}, length{L0, L1} {
        validate();
    }

    void validate() const {
        if (dim != 1 && dim != 2) throw std::invalid_argument("SpatialGrid: dim must be 1 or 2");
        for (int d = 0; d < dim; ++d) {
            if (n[d] < 8 || !is_pow2(n[d]))
                throw std::invalid_argument("SpatialGrid: points per dimension must be a power of two >= 8, got " +
                                            std::to_string(n[d]));
            if (!(length[d] > 0.0)) throw std::invalid_argument("SpatialGrid: extent must be positive");
        }
    }

    std::size_t points() const { return dim == 1 ? n[0] : n[0] * n[1]; }

    double spacing(int d = 0) const { return length[d] / static_cast<double>(n[d]); }

    // d-dimensional cell volume used by the discrete L^2 measure.
    double cell() const {
        double c = spacing(0);
        if (dim == 2) c *= spacing(1);
        return c;
    }

    double coord(int d, std::size_t i) const { return static_cast<double>(i) * spacing(d); }

    // Wavenumber of FFT bin `idx` along axis d, standard order (non-negative
    // first, then negative; the Nyquist bin maps to -pi*n/L).
    double wavenumber(int d, std::size_t idx) const {
        const std::size_t nd = n[d];
        const double base = 2.0 * kPi / length[d];
        const auto s = static_cast<long long>(idx);
        const auto half = static_cast<long long>(nd / 2);
        return base * static_cast<double>(s < half ? s : s - static_cast<long long>(nd));
    }

    // Row-major node index; axis 0 is the slow axis.
    std::size_t index(std::size_t i0, std::size_t i1 = 0) const {
        return dim == 1 ? i0 : i0 * n[1] + i1;
    }

    // Signed displacement x - c folded into [-L/2, L/2).
    double periodic_delta(int d, double x, double c) const {
        const double L = length[d];
        double u = x - c;
        u -= L * std::floor(u / L + 0.5);
        return u;
    }

    bool operator==(const SpatialGrid& o) const {
        return dim == o.dim && n == o.n && length == o.length;
    }
    bool operator!=(const SpatialGrid& o) const { return !(*this == o); }
};

// (x, p) discretization for Wigner fields. The momentum lattice is the
// Fourier dual of the y-lattice used by the Wigner transform: y_j runs over
// steps of 2h, so dp = pi/L and p covers [-pi/(2h), pi/(2h)). With that
// pairing the transform, its inverse, and the Theta[V] multiplier all act on
// exactly representable lattices (x +- y/2 lands on grid nodes).
struct PhaseGrid {
    SpatialGrid space;
    std::size_t np = 8;

    PhaseGrid() = default;

    explicit PhaseGrid(const SpatialGrid& xg) : space(xg), np(xg.n[0]) {
        if (xg.dim != 1)
            throw std::invalid_argument("PhaseGrid: phase-space solvers are built for d = 1");
    }

    double dp() const { return kPi / space.length[0]; }
    double momentum_extent() const { return static_cast<double>(np) * dp(); }  // full width
    double p_max() const { return 0.5 * momentum_extent(); }

    // Momentum of storage slot ip in [0, np): p = (ip - np/2) * dp.
    double p(std::size_t ip) const {
        return (static_cast<double>(ip) - 0.5 * static_cast<double>(np)) * dp();
    }

    std::size_t nx() const { return space.n[0]; }
    std::size_t points() const { return nx() * np; }

    // Phase-space cell for the discrete dx dp measure.
    double cell() const { return space.spacing(0) * dp(); }

    std::size_t index(std::size_t ix, std::size_t ip) const { return ix * np + ip; }

    bool operator==(const PhaseGrid& o) const { return space == o.space && np == o.np; }
    bool operator!=(const PhaseGrid& o) const { return !(*this == o); }
};

}  // namespace wlsim
