#pragma once

#include <functional>
#include <vector>

#include "wlsim/corrmat.hpp"
#include "wlsim/ensemble.hpp"

namespace wlsim {

// Real-time forcing of the unit-sphere system: for each j,
//   (K/2N) sum_k (psi_k - <psi_k, psi_j> psi_j).
// The sum over the tuple is accumulated in a canonical value order so a
// relabeled ensemble produces bitwise-identical forcings.
inline std::vector<ComplexField> coupling_rhs(const EnsembleState& s) {
    const std::size_t N = s.size();
    const std::size_t npts = s.grid().points();
    const double pref = s.K / (2.0 * static_cast<double>(N));

    CorrelationMatrix z = correlations(s);

    std::vector<cx> tuple(N);
    std::vector<cx> S(npts);
    for (std::size_t i = 0; i < npts; ++i) {
        for (std::size_t k = 0; k < N; ++k) tuple[k] = s.psi[k].v[i];
        S[i] = canonical_sum(std::span<const cx>(tuple));
    }

    std::vector<ComplexField> out;
    out.reserve(N);
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < N; ++k) tuple[k] = z.at(k, j);
        const cx sigma = canonical_sum(std::span<const cx>(tuple));
        ComplexField f(s.grid());
        for (std::size_t i = 0; i < npts; ++i)
            f.v[i] = pref * (S[i] - sigma * s.psi[j].v[i]);
        out.push_back(std::move(f));
    }
    return out;
}

// D(Psi) = max_{i,j} ||psi_i - psi_j||.
inline double diameter(const EnsembleState& s) {
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j)
            d = std::max(d, l2_distance(s.psi[i], s.psi[j]));
    return d;
}

struct DiameterArgmax {
    std::size_t i = 0, j = 1;
    double value = 0.0;
};

// First maximal pair in lexicographic (i, j) order.
inline DiameterArgmax diameter_argmax(const EnsembleState& s) {
    DiameterArgmax best;
    best.value = -1.0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            const double d = l2_distance(s.psi[i], s.psi[j]);
            if (d > best.value) best = {i, j, d};
        }
    return best;
}

namespace detail {

// Strang stepper for the unit-sphere S-L system. One step is
//   U(dt/2)  K(dt)  U(dt/2)
// where K is the exact Fourier kinetic multiplier exp(-i|k|^2 dt/2) and U is
// one RK4 substep of the stiffness-free remainder
//   d psi_j = [-i (V + Omega_j) psi_j + coupling_j(Psi)] dtau,
// with the pair inner products recomputed at every RK4 stage. The potential
// rides inside the RK4 substep: all sub-flows then conserve norms up to the
// substep truncation error, which makes the measured norm drift scale with dt
// instead of sitting at the round-off floor.
class SLStepper {
  public:
    SLStepper(const EnsembleState& s, double dt)
        : grid_(s.grid()), N_(s.size()), npts_(grid_.points()), K_(s.K), dt_(dt),
          Vs_(s.V.sample(grid_)) {
        offs_.resize(N_, 0.0);
        for (std::size_t j = 0; j < N_; ++j) offs_[j] = s.offset(j);
        kinetic_.resize(npts_);
        for (std::size_t i0 = 0; i0 < grid_.n[0]; ++i0)
            for (std::size_t i1 = 0; i1 < grid_.n[1]; ++i1) {
                double k2 = grid_.wavenumber(0, i0) * grid_.wavenumber(0, i0);
                if (grid_.dim == 2) k2 += grid_.wavenumber(1, i1) * grid_.wavenumber(1, i1);
                kinetic_[grid_.index(i0, i1)] = std::polar(1.0, -0.5 * k2 * dt);
            }
        y_.assign(N_, std::vector<cx>(npts_));
        ytmp_.assign(N_, std::vector<cx>(npts_));
        for (auto* k : {&k1_, &k2_, &k3_, &k4_}) k->assign(N_, std::vector<cx>(npts_));
        S_.resize(npts_);
        z_.resize(N_ * N_);
        tuple_.resize(N_);
    }

    double max_abs_potential() const {
        double m = 0.0;
        for (double v : Vs_) m = std::max(m, std::abs(v));
        for (double w : offs_) m = std::max(m, std::abs(w));
        return m;
    }

    void step(EnsembleState& s, bool renormalize) {
        for (std::size_t j = 0; j < N_; ++j) y_[j] = s.psi[j].v;

        rk4_half(0.5 * dt_);
        kinetic();
        rk4_half(0.5 * dt_);

        for (std::size_t j = 0; j < N_; ++j) {
            s.psi[j].v = y_[j];
            if (renormalize) {
                double nrm = 0.0;
                {
                    std::vector<double> t(npts_);
                    for (std::size_t i = 0; i < npts_; ++i) t[i] = std::norm(s.psi[j].v[i]);
                    nrm = std::sqrt(pairwise_sum(std::span<const double>(t)) * grid_.cell());
                }
                for (cx& v : s.psi[j].v) v /= nrm;
            }
        }
        s.t += dt_;
    }

  private:
    void derivative(const std::vector<std::vector<cx>>& Y, std::vector<std::vector<cx>>& dY) {
        const double cell = grid_.cell();
        // pair inner products of the current stage
        terms_.resize(npts_);
        for (std::size_t a = 0; a < N_; ++a)
            for (std::size_t b = 0; b < N_; ++b) {
                for (std::size_t i = 0; i < npts_; ++i)
                    terms_[i] = std::conj(Y[a][i]) * Y[b][i];
                z_[a * N_ + b] = pairwise_sum(std::span<const cx>(terms_)) * cell;
            }
        for (std::size_t i = 0; i < npts_; ++i) {
            for (std::size_t k = 0; k < N_; ++k) tuple_[k] = Y[k][i];
            S_[i] = canonical_sum(std::span<const cx>(tuple_));
        }
        const double pref = K_ / (2.0 * static_cast<double>(N_));
        for (std::size_t j = 0; j < N_; ++j) {
            for (std::size_t k = 0; k < N_; ++k) tuple_[k] = z_[k * N_ + j];
            const cx sigma = canonical_sum(std::span<const cx>(tuple_));
            const double off = offs_[j];
            for (std::size_t i = 0; i < npts_; ++i) {
                const cx rot = cx(0.0, -(Vs_[i] + off)) * Y[j][i];
                dY[j][i] = rot + pref * (S_[i] - sigma * Y[j][i]);
            }
        }
    }

    void rk4_half(double tau) {
        derivative(y_, k1_);
        axpy(ytmp_, y_, k1_, 0.5 * tau);
        derivative(ytmp_, k2_);
        axpy(ytmp_, y_, k2_, 0.5 * tau);
        derivative(ytmp_, k3_);
        axpy(ytmp_, y_, k3_, tau);
        derivative(ytmp_, k4_);
        const double c = tau / 6.0;
        for (std::size_t j = 0; j < N_; ++j)
            for (std::size_t i = 0; i < npts_; ++i)
                y_[j][i] += c * (k1_[j][i] + 2.0 * k2_[j][i] + 2.0 * k3_[j][i] + k4_[j][i]);
    }

    void axpy(std::vector<std::vector<cx>>& out, const std::vector<std::vector<cx>>& y,
              const std::vector<std::vector<cx>>& k, double a) {
        for (std::size_t j = 0; j < N_; ++j)
            for (std::size_t i = 0; i < npts_; ++i) out[j][i] = y[j][i] + a * k[j][i];
    }

    void kinetic() {
        for (std::size_t j = 0; j < N_; ++j) {
            detail::fft_all_axes(grid_, y_[j], true);
            for (std::size_t i = 0; i < npts_; ++i) y_[j][i] *= kinetic_[i];
            detail::fft_all_axes(grid_, y_[j], false);
        }
    }

    SpatialGrid grid_;
    std::size_t N_, npts_;
    double K_, dt_;
    std::vector<double> Vs_, offs_;
    std::vector<cx> kinetic_;
    std::vector<std::vector<cx>> y_, ytmp_, k1_, k2_, k3_, k4_;
    std::vector<cx> S_, tuple_;
    std::vector<cx> z_, terms_;
};

}  // namespace detail

struct SLOptions {
    std::size_t obs_every = 1;       // sample observables every this many steps
    std::size_t snapshot_every = 0;  // 0 = keep no field snapshots
    bool renormalize = false;        // escape hatch for very long runs; off by default
    std::vector<std::function<void(const EnsembleState&, std::size_t)>> observers;
};

struct SLTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> norms;  // [sample][oscillator]
    std::vector<double> diam;
    std::vector<CorrelationMatrix> corr;
    std::vector<double> snapshot_times;
    std::vector<EnsembleState> snapshots;
    double dt = 0.0;
    double K = 0.0;
    std::size_t n_osc = 0;
    Potential V;
    std::vector<double> omega_offsets;
    EnsembleState initial;
    std::string scheme = "strang2(rk4-potential-coupling, exact-kinetic)";

    std::size_t samples() const { return times.size(); }
};

inline void check_dt_preconditions(const EnsembleState& s, double dt, double max_abs_V) {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
    if (dt * max_abs_V >= 0.5)
        throw std::invalid_argument("step: dt * max|V| must stay below 0.5");
    if (dt * s.K >= 0.5) throw std::invalid_argument("step: dt * K must stay below 0.5");
}

// One Strang step. Second-order accurate in dt; throws IntegrationFailure if
// any norm moves more than 1e-6 within the step.
inline EnsembleState step(const EnsembleState& s, double dt) {
    detail::SLStepper stepper(s, dt);
    check_dt_preconditions(s, dt, stepper.max_abs_potential());
    std::vector<double> pre(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) pre[j] = l2_norm(s.psi[j]);
    EnsembleState out = s;
    stepper.step(out, false);
    for (std::size_t j = 0; j < s.size(); ++j) {
        const double post = l2_norm(out.psi[j]);
        if (std::abs(post - pre[j]) > tol::step_norm_drift)
            throw IntegrationFailure("step: norm drift " + std::to_string(std::abs(post - pre[j])) +
                                     " beyond 1e-6 in a single step");
    }
    return out;
}

inline SLTrajectory evolve(const EnsembleState& s0, double T, double dt,
                           const SLOptions& opts = {}) {
    if (T < 0.0) throw std::invalid_argument("evolve: T must be nonnegative");

    SLTrajectory traj;
    traj.dt = dt;
    traj.K = s0.K;
    traj.n_osc = s0.size();
    traj.V = s0.V;
    traj.omega_offsets = s0.omega_offsets;
    traj.initial = s0;

    auto sample = [&](const EnsembleState& s, std::size_t stepidx) {
        traj.times.push_back(s.t);
        std::vector<double> nrm(s.size());
        for (std::size_t j = 0; j < s.size(); ++j) nrm[j] = l2_norm(s.psi[j]);
        traj.norms.push_back(std::move(nrm));
        traj.diam.push_back(diameter(s));
        traj.corr.push_back(correlations(s));
        for (const auto& obs : opts.observers) obs(s, stepidx);
    };

    EnsembleState s = s0;
    sample(s, 0);
    if (opts.snapshot_every > 0) {
        traj.snapshot_times.push_back(s.t);
        traj.snapshots.push_back(s);
    }
    if (T == 0.0) return traj;

    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    if (steps == 0) throw std::invalid_argument("evolve: T shorter than one step");

    detail::SLStepper stepper(s, dt);
    check_dt_preconditions(s, dt, stepper.max_abs_potential());

    std::vector<double> prev_norm(s.size());
    for (std::size_t j = 0; j < s.size(); ++j) prev_norm[j] = l2_norm(s.psi[j]);

    const std::size_t obs_every = opts.obs_every == 0 ? 1 : opts.obs_every;
    for (std::size_t i = 1; i <= steps; ++i) {
        stepper.step(s, opts.renormalize);
        s.t = static_cast<double>(i) * dt + s0.t;  // avoid accumulated time round-off
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double nrm = l2_norm(s.psi[j]);
            if (std::abs(nrm - prev_norm[j]) > tol::step_norm_drift)
                throw IntegrationFailure("evolve: norm drift beyond 1e-6 in one step at t = " +
                                         std::to_string(s.t));
            prev_norm[j] = nrm;
        }
        if (i % obs_every == 0 || i == steps) sample(s, i);
        if (opts.snapshot_every > 0 && (i % opts.snapshot_every == 0 || i == steps)) {
            traj.snapshot_times.push_back(s.t);
            traj.snapshots.push_back(s);
        }
    }
    return traj;
}

}  // namespace wlsim
