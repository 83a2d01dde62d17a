#pragma once

#include <cmath>
#include <vector>

#include "wlsim/ensemble.hpp"
#include "wlsim/util.hpp"

namespace wlsim {

// Phase oscillators theta_i with natural frequencies Omega_i. Phases are kept
// unwrapped during integration; reduce modulo 2*pi only at output if needed.
struct KuramotoState {
    double t = 0.0;
    std::vector<double> theta;
    std::vector<double> omega;
    double K = 0.0;

    std::size_t size() const { return theta.size(); }

    void validate() const {
        if (theta.empty()) throw std::invalid_argument("KuramotoState: empty");
        if (theta.size() != omega.size())
            throw std::invalid_argument("KuramotoState: theta/omega size mismatch");
        for (double x : theta)
            if (!std::isfinite(x)) throw std::invalid_argument("KuramotoState: non-finite phase");
    }
};

// theta_i' = Omega_i + (K/N) sum_k sin(theta_k - theta_i).
inline std::vector<double> kuramoto_rhs(const KuramotoState& s) {
    const std::size_t N = s.size();
    std::vector<double> out(N), terms(N);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t k = 0; k < N; ++k) terms[k] = std::sin(s.theta[k] - s.theta[i]);
        out[i] = s.omega[i] + (s.K / static_cast<double>(N)) *
                                  canonical_sum(std::span<const double>(terms));
    }
    return out;
}

struct KuramotoTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> theta;  // [sample][oscillator]
    double dt = 0.0;
    double K = 0.0;
    std::vector<double> omega;
};

inline KuramotoTrajectory evolve_kuramoto(const KuramotoState& s0, double T, double dt,
                                          std::size_t obs_every = 1) {
    s0.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_kuramoto: dt must be positive");
    KuramotoTrajectory traj;
    traj.dt = dt;
    traj.K = s0.K;
    traj.omega = s0.omega;

    KuramotoState s = s0;
    traj.times.push_back(s.t);
    traj.theta.push_back(s.theta);
    if (T == 0.0) return traj;

    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    const std::size_t N = s.size();
    KuramotoState tmp = s;
    for (std::size_t i = 1; i <= steps; ++i) {
        const std::vector<double> k1 = kuramoto_rhs(s);
        for (std::size_t j = 0; j < N; ++j) tmp.theta[j] = s.theta[j] + 0.5 * dt * k1[j];
        const std::vector<double> k2 = kuramoto_rhs(tmp);
        for (std::size_t j = 0; j < N; ++j) tmp.theta[j] = s.theta[j] + 0.5 * dt * k2[j];
        const std::vector<double> k3 = kuramoto_rhs(tmp);
        for (std::size_t j = 0; j < N; ++j) tmp.theta[j] = s.theta[j] + dt * k3[j];
        const std::vector<double> k4 = kuramoto_rhs(tmp);
        for (std::size_t j = 0; j < N; ++j)
            s.theta[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        s.t = s0.t + static_cast<double>(i) * dt;
        if (i % (obs_every == 0 ? 1 : obs_every) == 0 || i == steps) {
            traj.times.push_back(s.t);
            traj.theta.push_back(s.theta);
        }
    }
    return traj;
}

// Extraction map from a space-homogeneous S-L state under the unit-modulus
// ansatz psi_i = e^{-i theta_i} / sqrt(L^d): theta_i = -arg(psi_i), and the
// per-oscillator constant potential plays the role of Omega_i.
inline KuramotoState reduce_homogeneous(const EnsembleState& s, double rel_spread_tol = 1e-10) {
    KuramotoState out;
    out.t = s.t;
    out.K = s.K;
    const std::size_t npts = s.grid().points();
    for (std::size_t j = 0; j < s.size(); ++j) {
        cx mean = 0.0;
        for (const cx& v : s.psi[j].v) mean += v;
        mean /= static_cast<double>(npts);
        double spread = 0.0;
        for (const cx& v : s.psi[j].v) spread = std::max(spread, std::abs(v - mean));
        if (!(std::abs(mean) > 0.0) || spread / std::abs(mean) > rel_spread_tol)
            throw PreconditionError("reduce_homogeneous: field " + std::to_string(j + 1) +
                                    " is not constant in space (reduction inapplicable)");
        out.theta.push_back(-std::arg(mean));
    }
    if (s.V.kind != Potential::Kind::Zero && s.V.kind != Potential::Kind::Constant)
        throw PreconditionError(
            "reduce_homogeneous: potential must be constant per oscillator (Omega_i)");
    const double base = s.V.kind == Potential::Kind::Constant ? s.V.value : 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) out.omega.push_back(base + s.offset(j));
    return out;
}

// Exact two-oscillator solution with Omega = 0: the phase gap obeys
// d' = -K sin d, so  d(t) = 2 atan(tan(d0/2) e^{-Kt}).
inline double kuramoto_pair_gap(double d0, double K, double t) {
    return 2.0 * std::atan(std::tan(0.5 * d0) * std::exp(-K * t));
}

}  // namespace wlsim
