#pragma once

#include <vector>

#include "wlsim/ensemble.hpp"
#include "wlsim/field.hpp"
#include "wlsim/grid.hpp"
#include "wlsim/potential.hpp"

namespace wlsim {

// One function on the (x, p) phase grid, stored row-major with p fastest.
// Diagonal Wigner fields are real up to round-off; they are kept in complex
// storage so the same spectral kernels apply to w_j and w_jk.
struct WignerField {
    PhaseGrid grid;
    std::vector<cx> v;

    WignerField() = default;
    explicit WignerField(const PhaseGrid& g) : grid(g), v(g.points(), cx(0.0, 0.0)) {}
    WignerField(const PhaseGrid& g, std::vector<cx> values) : grid(g), v(std::move(values)) {
        if (v.size() != g.points())
            throw std::invalid_argument("WignerField: value count does not match grid");
    }

    double max_imag() const {
        double m = 0.0;
        for (const cx& z : v) m = std::max(m, std::abs(z.imag()));
        return m;
    }
};

inline void require_same_grid(const WignerField& a, const WignerField& b) {
    if (a.grid != b.grid) throw GridMismatchError("Wigner fields live on different grids");
}

// integral w dx dp
inline cx phase_integral(const WignerField& w) {
    return pairwise_sum(std::span<const cx>(w.v)) * w.grid.cell();
}

inline double phase_mass(const WignerField& w) { return phase_integral(w).real(); }

inline double phase_l2_norm_sq(const WignerField& w) {
    std::vector<double> terms(w.v.size());
    for (std::size_t i = 0; i < w.v.size(); ++i) terms[i] = std::norm(w.v[i]);
    return pairwise_sum(std::span<const double>(terms)) * w.grid.cell();
}

inline double phase_l2_norm(const WignerField& w) { return std::sqrt(phase_l2_norm_sq(w)); }

namespace wig {

// Transform pair between the momentum slots p = (ip - n/2) dp and the dual
// y-lattice y = (iy - n/2) dy with dp*dy = 2*pi/n. With both lattices centered
// the shifted DFT reduces to sign flips around a plain FFT (n is a multiple
// of four). to_p(to_y(row)) is the identity up to FFT round-off, which is the
// discrete round-trip the phase grid is built to guarantee.
inline void to_y_row(cx* row, std::size_t n) {
    for (std::size_t i = 1; i < n; i += 2) row[i] = -row[i];
    fft::forward(row, n);
    for (std::size_t i = 1; i < n; i += 2) row[i] = -row[i];
}

inline void to_p_row(cx* row, std::size_t n) {
    for (std::size_t i = 1; i < n; i += 2) row[i] = -row[i];
    fft::inverse(row, n);
    for (std::size_t i = 1; i < n; i += 2) row[i] = -row[i];
}

}  // namespace wig

// Discrete Wigner transform
//   w[psi, phi](x_i, p_m) = (h/pi) sum_{|y_j| < L/2} e^{2 pi i m j / n}
//                           conj(psi)(x_{i+j}) phi(x_{i-j}),
// the exact midpoint discretization of
//   (2 pi)^{-1} int e^{i y p} conj(psi)(x + y/2) phi(x - y/2) dy
// on the y-lattice with step 2h. The kernel is evaluated on the shorter arc
// of the circle only (|y| < L/2): the |y| >= L/2 contributions are the
// interference of the packet with its own periodic image, a full-amplitude
// ghost sitting at distance L/2 that the line transform does not have. The
// y = 0 term is untouched, so  sum w h dp = <psi, phi>  and the p-marginal
// sum_p w dp = conj(psi) phi  remain exact lattice identities.
inline WignerField wigner_transform(const ComplexField& psi, const ComplexField& phi,
                                    const PhaseGrid& pg) {
    require_same_grid(psi, phi);
    if (psi.grid != pg.space)
        throw GridMismatchError("wigner_transform: fields do not live on the phase grid's x-grid");
    if (pg.space.dim != 1)
        throw std::invalid_argument("wigner_transform: phase-space pipeline supports d = 1");
    const std::size_t n = pg.nx();
    const std::size_t np = pg.np;
    const std::size_t mask = n - 1;
    const double scale = pg.space.spacing(0) / kPi;

    WignerField w(pg);
    std::vector<cx> g(n);
    for (std::size_t ix = 0; ix < n; ++ix) {
        for (std::size_t j = 0; j < n; ++j) {
            const bool outside = j >= n / 4 && j <= 3 * n / 4;  // |y_j| >= L/2
            g[j] = outside ? cx(0.0, 0.0)
                           : std::conj(psi.v[(ix + j) & mask]) * phi.v[(ix + n - j) & mask];
        }
        fft::inverse_unscaled(g.data(), n);
        for (std::size_t ip = 0; ip < np; ++ip)
            w.v[w.grid.index(ix, ip)] = scale * g[(ip + n / 2) & mask];
    }
    return w;
}

inline WignerField wigner_transform(const ComplexField& psi, const PhaseGrid& pg) {
    return wigner_transform(psi, psi, pg);
}

namespace wig {

// y-space multiplier data for Theta[V]: dV(ix, iy) = V(x + y/2) - V(x - y/2)
// with y/2 = (iy - n/2) h, which lands on grid nodes by the dual-lattice
// construction.
inline std::vector<double> potential_difference(const PhaseGrid& pg,
                                                const std::vector<double>& Vs) {
    const std::size_t n = pg.nx();
    const std::size_t np = pg.np;
    const std::size_t mask = n - 1;
    std::vector<double> dV(n * np);
    for (std::size_t ix = 0; ix < n; ++ix) {
        for (std::size_t iy = 0; iy < np; ++iy) {
            const auto s = static_cast<long long>(iy) - static_cast<long long>(np / 2);
            const std::size_t plus = (ix + static_cast<std::size_t>(s + static_cast<long long>(n))) & mask;
            const std::size_t minus = (ix + static_cast<std::size_t>(static_cast<long long>(n) - s)) & mask;
            dV[ix * np + iy] = Vs[plus] - Vs[minus];
        }
    }
    return dV;
}

}  // namespace wig

// The pseudodifferential operator Theta[V]: multiplication by -i dV(x, y) in
// the y-representation. Linear in w; vanishes identically for constant V.
inline WignerField theta_V(const WignerField& w, const Potential& V) {
    const PhaseGrid& pg = w.grid;
    const std::vector<double> Vs = V.sample(pg.space);
    const std::vector<double> dV = wig::potential_difference(pg, Vs);
    const std::size_t n = pg.nx(), np = pg.np;

    WignerField out = w;
    for (std::size_t ix = 0; ix < n; ++ix) {
        cx* row = out.v.data() + ix * np;
        wig::to_y_row(row, np);
        for (std::size_t iy = 0; iy < np; ++iy) row[iy] *= cx(0.0, -dV[ix * np + iy]);
        wig::to_p_row(row, np);
    }
    return out;
}

namespace wig {

// Exact propagators of the two linear pieces.

// exp(-tau * Theta[V]): multiply by e^{+i dV tau} in y-space.
inline void theta_propagate(std::vector<cx>& v, const PhaseGrid& pg,
                            const std::vector<double>& dV, double tau) {
    const std::size_t n = pg.nx(), np = pg.np;
    for (std::size_t ix = 0; ix < n; ++ix) {
        cx* row = v.data() + ix * np;
        to_y_row(row, np);
        for (std::size_t iy = 0; iy < np; ++iy) row[iy] *= std::polar(1.0, dV[ix * np + iy] * tau);
        to_p_row(row, np);
    }
}

// exp(-tau p d/dx): multiply by e^{-i k p tau} on the x-spectrum.
inline void transport_propagate(std::vector<cx>& v, const PhaseGrid& pg, double tau,
                                std::vector<cx>& scratch) {
    const std::size_t n = pg.nx(), np = pg.np;
    for (std::size_t ip = 0; ip < np; ++ip) {
        cx* col = v.data() + ip;
        scratch.resize(n);
        for (std::size_t i = 0; i < n; ++i) scratch[i] = col[i * np];
        fft::forward(scratch.data(), n);
        const double p = pg.p(ip);
        for (std::size_t l = 0; l < n; ++l)
            scratch[l] *= std::polar(1.0, -pg.space.wavenumber(0, l) * p * tau);
        fft::inverse(scratch.data(), n);
        for (std::size_t i = 0; i < n; ++i) col[i * np] = scratch[i];
    }
}

// -p dw/dx as a field (spectral x-derivative, Nyquist zeroed).
inline std::vector<cx> transport_term(const std::vector<cx>& v, const PhaseGrid& pg) {
    const std::size_t n = pg.nx(), np = pg.np;
    std::vector<cx> out(v.size());
    std::vector<cx> scratch(n);
    for (std::size_t ip = 0; ip < np; ++ip) {
        for (std::size_t i = 0; i < n; ++i) scratch[i] = v[i * np + ip];
        fft::forward(scratch.data(), n);
        for (std::size_t l = 0; l < n; ++l) {
            double k = pg.space.wavenumber(0, l);
            if (l == n / 2) k = 0.0;
            scratch[l] *= cx(0.0, k);
        }
        fft::inverse(scratch.data(), n);
        const double p = pg.p(ip);
        for (std::size_t i = 0; i < n; ++i) out[i * np + ip] = -p * scratch[i];
    }
    return out;
}

}  // namespace wig

// State of the Wigner-Lohe system: N diagonal fields w_j plus the upper
// triangle of complex pair fields w_jk (j < k); w_kj = conj(w_jk) is a
// structural identity, never stored. z_jk caches the phase-space integrals.
struct WignerLoheState {
    double t = 0.0;
    std::size_t n_osc = 0;
    PhaseGrid grid;
    std::vector<WignerField> diag;
    std::vector<WignerField> off;  // index pair_index(j, k)
    double K = 0.0;
    Potential V;
    std::vector<cx> z;  // N x N cache

    static std::size_t pair_index(std::size_t j, std::size_t k, std::size_t N) {
        return j * N - j * (j + 1) / 2 + (k - j - 1);
    }

    cx zat(std::size_t j, std::size_t k) const { return z[j * n_osc + k]; }

    void refresh_integrals() {
        z.assign(n_osc * n_osc, cx(0.0, 0.0));
        for (std::size_t j = 0; j < n_osc; ++j) z[j * n_osc + j] = phase_integral(diag[j]);
        for (std::size_t j = 0; j < n_osc; ++j)
            for (std::size_t k = j + 1; k < n_osc; ++k) {
                const cx zjk = phase_integral(off[pair_index(j, k, n_osc)]);
                z[j * n_osc + k] = zjk;
                z[k * n_osc + j] = std::conj(zjk);
            }
    }

    void validate(double mass_tol = 1e-6) const {
        if (n_osc < 2) throw std::invalid_argument("WignerLoheState: need at least two oscillators");
        if (diag.size() != n_osc || off.size() != n_osc * (n_osc - 1) / 2)
            throw std::invalid_argument("WignerLoheState: field count mismatch");
        for (const auto& w : diag) {
            if (w.grid != grid) throw GridMismatchError("WignerLoheState: grid mismatch");
            if (std::abs(phase_mass(w) - 1.0) > mass_tol)
                throw std::invalid_argument("WignerLoheState: diagonal mass is not 1 within 1e-6");
            if (w.max_imag() > 1e-10)
                throw std::invalid_argument("WignerLoheState: diagonal field has imaginary residue");
        }
        for (const auto& w : off) {
            if (w.grid != grid) throw GridMismatchError("WignerLoheState: grid mismatch");
            if (std::abs(phase_integral(w)) > 1.0 + 1e-6)
                throw std::invalid_argument("WignerLoheState: |integral w_jk| exceeds 1");
        }
    }
};

// Initial Wigner-Lohe data generated as transforms of wave functions, which
// guarantees the representability constraints (unit masses, |z_jk| <= 1).
inline WignerLoheState make_wigner_lohe_state(const std::vector<ComplexField>& psi, double K,
                                              const Potential& V, const PhaseGrid& pg) {
    WignerLoheState s;
    s.n_osc = psi.size();
    s.grid = pg;
    s.K = K;
    s.V = V;
    for (std::size_t j = 0; j < psi.size(); ++j) s.diag.push_back(wigner_transform(psi[j], pg));
    for (std::size_t j = 0; j < psi.size(); ++j)
        for (std::size_t k = j + 1; k < psi.size(); ++k)
            s.off.push_back(wigner_transform(psi[j], psi[k], pg));
    s.refresh_integrals();
    s.validate();
    return s;
}

struct WLDeriv {
    std::vector<std::vector<cx>> ddiag;
    std::vector<std::vector<cx>> doff;
};

namespace wig {

// Coupling-only derivative of the general-N system (complex pair equations):
//   d w_j  = (K/N)  sum_k [ Re w_jk - r_jk w_j ]
//   d w_jk = (K/2N) sum_l [ w_jl + w_lk - (z_jl + z_lk) w_jk ]
// with every z recomputed from the current fields. Tuple sums run in
// canonical value order (permutation equivariance at the bit level).
inline void coupling_derivative(const WignerLoheState& ref,
                                const std::vector<std::vector<cx>>& diag,
                                const std::vector<std::vector<cx>>& off, WLDeriv& out) {
    const std::size_t N = ref.n_osc;
    const std::size_t npts = ref.grid.points();
    const double cell = ref.grid.cell();
    const double K = ref.K;

    std::vector<cx> z(N * N);
    for (std::size_t j = 0; j < N; ++j)
        z[j * N + j] = pairwise_sum(std::span<const cx>(diag[j])) * cell;
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = j + 1; k < N; ++k) {
            const cx zjk =
                pairwise_sum(std::span<const cx>(off[WignerLoheState::pair_index(j, k, N)])) * cell;
            z[j * N + k] = zjk;
            z[k * N + j] = std::conj(zjk);
        }

    auto wval = [&](std::size_t a, std::size_t b, std::size_t i) -> cx {
        if (a == b) return diag[a][i];
        if (a < b) return off[WignerLoheState::pair_index(a, b, N)][i];
        return std::conj(off[WignerLoheState::pair_index(b, a, N)][i]);
    };

    out.ddiag.assign(N, std::vector<cx>(npts));
    out.doff.assign(N * (N - 1) / 2, std::vector<cx>(npts));

    std::vector<cx> tuple(N);
    const double dpref = K / static_cast<double>(N);
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t i = 0; i < npts; ++i) {
            for (std::size_t k = 0; k < N; ++k) {
                const cx wjk = wval(j, k, i);
                tuple[k] = cx(wjk.real(), 0.0) - z[j * N + k].real() * diag[j][i];
            }
            out.ddiag[j][i] = dpref * canonical_sum(std::span<const cx>(tuple));
        }
    }
    const double opref = K / (2.0 * static_cast<double>(N));
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = j + 1; k < N; ++k) {
            std::vector<cx>& d = out.doff[WignerLoheState::pair_index(j, k, N)];
            for (std::size_t i = 0; i < npts; ++i) {
                const cx wjk = wval(j, k, i);
                for (std::size_t l = 0; l < N; ++l)
                    tuple[l] = wval(j, l, i) + wval(l, k, i) -
                               (z[j * N + l] + z[l * N + k]) * wjk;
                d[i] = opref * canonical_sum(std::span<const cx>(tuple));
            }
        }
    }
}

}  // namespace wig

// Full right-hand side of the N = 2 system in its literal two-oscillator
// form: transport and Theta[V] plus
//   (K/2)(w12+ - r12 w_j)  and  (K/4)(w1 + w2 - 2 z12 w12),
// with z12 = integral of w12 recomputed from the current field.
inline WLDeriv wl_rhs_n2(const WignerLoheState& s) {
    if (s.n_osc != 2) throw std::invalid_argument("wl_rhs_n2: requires N = 2");
    const std::size_t npts = s.grid.points();
    const double K = s.K;
    const cx z12 = phase_integral(s.off[0]);
    const double r12 = z12.real();

    WLDeriv d;
    d.ddiag.assign(2, std::vector<cx>(npts));
    d.doff.assign(1, std::vector<cx>(npts));

    const std::vector<double> dV = wig::potential_difference(s.grid, s.V.sample(s.grid.space));
    for (std::size_t j = 0; j < 2; ++j) {
        std::vector<cx> lin = wig::transport_term(s.diag[j].v, s.grid);
        WignerField th = theta_V(s.diag[j], s.V);
        for (std::size_t i = 0; i < npts; ++i) {
            const cx cpl = 0.5 * K * (cx(s.off[0].v[i].real(), 0.0) - r12 * s.diag[j].v[i]);
            d.ddiag[j][i] = lin[i] - th.v[i] + cpl;
        }
    }
    {
        std::vector<cx> lin = wig::transport_term(s.off[0].v, s.grid);
        WignerField th = theta_V(s.off[0], s.V);
        for (std::size_t i = 0; i < npts; ++i) {
            const cx cpl =
                0.25 * K * (s.diag[0].v[i] + s.diag[1].v[i] - 2.0 * z12 * s.off[0].v[i]);
            d.doff[0][i] = lin[i] - th.v[i] + cpl;
        }
    }
    return d;
}

// Full right-hand side of the general-N system. The pair equations are
// integrated in complex form; splitting w_jk = w+ + i w- gives, with
// R = r_jl + r_lk and S = s_jl + s_lk,
//   d w+ = (K/2N) sum_l [ w+_jl + w+_lk - R w+_jk + S w-_jk ]   (+ transport)
//   d w- = (K/2N) sum_l [ w-_jl + w-_lk - R w-_jk - S w+_jk ],
// which is the split exposed for reporting; the complex equation is the one
// the solver advances.
inline WLDeriv wl_rhs_general(const WignerLoheState& s) {
    const std::size_t N = s.n_osc;
    std::vector<std::vector<cx>> diag(N), off(N * (N - 1) / 2);
    for (std::size_t j = 0; j < N; ++j) diag[j] = s.diag[j].v;
    for (std::size_t m = 0; m < off.size(); ++m) off[m] = s.off[m].v;

    WLDeriv d;
    wig::coupling_derivative(s, diag, off, d);
    for (std::size_t j = 0; j < N; ++j) {
        std::vector<cx> lin = wig::transport_term(s.diag[j].v, s.grid);
        WignerField th = theta_V(s.diag[j], s.V);
        for (std::size_t i = 0; i < lin.size(); ++i) d.ddiag[j][i] += lin[i] - th.v[i];
    }
    for (std::size_t m = 0; m < off.size(); ++m) {
        std::vector<cx> lin = wig::transport_term(s.off[m].v, s.grid);
        WignerField th = theta_V(s.off[m], s.V);
        for (std::size_t i = 0; i < lin.size(); ++i) d.doff[m][i] += lin[i] - th.v[i];
    }
    return d;
}

// ||w_1 - w_2||_{L^2(dx dp)} for the two-oscillator system.
inline double wl_l2_distance(const WignerLoheState& s) {
    if (s.n_osc != 2) throw std::invalid_argument("wl_l2_distance: requires N = 2");
    std::vector<double> terms(s.grid.points());
    for (std::size_t i = 0; i < terms.size(); ++i)
        terms[i] = std::norm(s.diag[0].v[i] - s.diag[1].v[i]);
    return std::sqrt(pairwise_sum(std::span<const double>(terms)) * s.grid.cell());
}

struct WLOptions {
    std::size_t obs_every = 1;
    std::size_t snapshot_every = 0;
};

struct WLTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> masses;       // [sample][oscillator]
    std::vector<std::vector<cx>> z_upper;          // [sample][pair j<k lexicographic]
    std::vector<double> dist2;                     // ||w1-w2||^2 when N == 2
    std::vector<double> snapshot_times;
    std::vector<WignerLoheState> snapshots;
    double dt = 0.0;
    double K = 0.0;
    std::size_t n_osc = 0;
    PhaseGrid grid;
    bool momentum_band_ok = true;
};

// Fraction of |w| mass at |p| >= p_max/2; the momentum box must hold the data
// with margin for the spectral transport to stay faithful.
inline double momentum_tail_fraction(const WignerField& w) {
    const PhaseGrid& g = w.grid;
    double tail = 0.0, total = 0.0;
    for (std::size_t ix = 0; ix < g.nx(); ++ix)
        for (std::size_t ip = 0; ip < g.np; ++ip) {
            const double a = std::abs(w.v[g.index(ix, ip)]);
            total += a;
            if (std::abs(g.p(ip)) >= 0.5 * g.p_max()) tail += a;
        }
    return total > 0.0 ? tail / total : 0.0;
}

// Strang evolution: exact spectral half-steps of the transport + Theta[V]
// flow (themselves Strang-split), RK4 for the global coupling. The linear
// propagators are unitary multipliers, so masses and pair integrals move only
// through the coupling substep.
inline WLTrajectory evolve_wl(const WignerLoheState& s0, double T, double dt,
                              const WLOptions& opts = {}) {
    s0.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_wl: dt must be positive");
    if (dt * s0.K >= 0.5) throw std::invalid_argument("evolve_wl: dt * K must stay below 0.5");

    WLTrajectory traj;
    traj.dt = dt;
    traj.K = s0.K;
    traj.n_osc = s0.n_osc;
    traj.grid = s0.grid;
    for (const auto& w : s0.diag)
        if (momentum_tail_fraction(w) > 1e-10) traj.momentum_band_ok = false;

    WignerLoheState s = s0;
    const std::size_t N = s.n_osc;
    const std::size_t M = N * (N - 1) / 2;
    const std::size_t npts = s.grid.points();
    const std::vector<double> dV = wig::potential_difference(s.grid, s.V.sample(s.grid.space));

    auto sample = [&](const WignerLoheState& st) {
        traj.times.push_back(st.t);
        std::vector<double> m(N);
        std::vector<cx> zu(M);
        for (std::size_t j = 0; j < N; ++j) m[j] = phase_mass(st.diag[j]);
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = j + 1; k < N; ++k)
                zu[WignerLoheState::pair_index(j, k, N)] =
                    phase_integral(st.off[WignerLoheState::pair_index(j, k, N)]);
        for (double mj : m)
            if (std::abs(mj - 1.0) > tol::mass_drift)
                throw IntegrationFailure("evolve_wl: mass drift beyond 1e-4 at t = " +
                                         std::to_string(st.t));
        traj.masses.push_back(std::move(m));
        traj.z_upper.push_back(std::move(zu));
        traj.dist2.push_back(N == 2 ? phase_l2_norm_sq(WignerField(st.grid, [&] {
                                 std::vector<cx> dv(npts);
                                 for (std::size_t i = 0; i < npts; ++i)
                                     dv[i] = st.diag[0].v[i] - st.diag[1].v[i];
                                 return dv;
                             }()))
                                    : 0.0);
    };

    sample(s);
    if (opts.snapshot_every > 0) {
        traj.snapshot_times.push_back(s.t);
        traj.snapshots.push_back(s);
    }
    if (T == 0.0) return traj;

    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    std::vector<cx> scratch;

    auto linear_half = [&](WignerLoheState& st, double tau) {
        // A(tau/2) Theta(tau) A(tau/2) on every field
        for (auto* fields : {&st.diag, &st.off}) {
            for (WignerField& w : *fields) {
                wig::transport_propagate(w.v, st.grid, 0.5 * tau, scratch);
                wig::theta_propagate(w.v, st.grid, dV, tau);
                wig::transport_propagate(w.v, st.grid, 0.5 * tau, scratch);
            }
        }
    };

    std::vector<std::vector<cx>> yd(N, std::vector<cx>(npts)), yo(M, std::vector<cx>(npts));
    std::vector<std::vector<cx>> td(N, std::vector<cx>(npts)), to(M, std::vector<cx>(npts));
    WLDeriv k1, k2, k3, k4;

    auto coupling_rk4 = [&](WignerLoheState& st, double tau) {
        for (std::size_t j = 0; j < N; ++j) yd[j] = st.diag[j].v;
        for (std::size_t m = 0; m < M; ++m) yo[m] = st.off[m].v;
        auto eval = [&](const std::vector<std::vector<cx>>& ad,
                        const std::vector<std::vector<cx>>& ao, WLDeriv& out) {
            wig::coupling_derivative(st, ad, ao, out);
        };
        auto add = [&](std::vector<std::vector<cx>>& od, std::vector<std::vector<cx>>& oo,
                       const WLDeriv& k, double a) {
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t i = 0; i < npts; ++i) od[j][i] = yd[j][i] + a * k.ddiag[j][i];
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t i = 0; i < npts; ++i) oo[m][i] = yo[m][i] + a * k.doff[m][i];
        };
        eval(yd, yo, k1);
        add(td, to, k1, 0.5 * tau);
        eval(td, to, k2);
        add(td, to, k2, 0.5 * tau);
        eval(td, to, k3);
        add(td, to, k3, tau);
        eval(td, to, k4);
        const double c = tau / 6.0;
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t i = 0; i < npts; ++i)
                st.diag[j].v[i] = yd[j][i] + c * (k1.ddiag[j][i] + 2.0 * k2.ddiag[j][i] +
                                                  2.0 * k3.ddiag[j][i] + k4.ddiag[j][i]);
        for (std::size_t m = 0; m < M; ++m)
            for (std::size_t i = 0; i < npts; ++i)
                st.off[m].v[i] = yo[m][i] + c * (k1.doff[m][i] + 2.0 * k2.doff[m][i] +
                                                 2.0 * k3.doff[m][i] + k4.doff[m][i]);
    };

    const std::size_t obs_every = opts.obs_every == 0 ? 1 : opts.obs_every;
    for (std::size_t i = 1; i <= steps; ++i) {
        linear_half(s, 0.5 * dt);
        coupling_rk4(s, dt);
        linear_half(s, 0.5 * dt);
        s.t = static_cast<double>(i) * dt + s0.t;
        s.refresh_integrals();
        if (i % obs_every == 0 || i == steps) sample(s);
        if (opts.snapshot_every > 0 && (i % opts.snapshot_every == 0 || i == steps)) {
            traj.snapshot_times.push_back(s.t);
            traj.snapshots.push_back(s);
        }
    }
    return traj;
}

}  // namespace wlsim
