#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "wlsim/hydro.hpp"
#include "wlsim/initcond.hpp"

using namespace wlsim;

namespace {

SLTrajectory sync_trajectory(double T, double dt, std::size_t snap_every, double K = 1.0,
                             cx z0 = cx(0.3, 0.4)) {
    const SpatialGrid g(256, 16.0);
    auto pair = pair_with_overlap(g, z0, 8.0, 1.0, 1.0);
    EnsembleState s(pair, K, Potential::harmonic(1.0, 8.0));
    SLOptions opts;
    opts.obs_every = snap_every;
    opts.snapshot_every = snap_every;
    return evolve(s, T, dt, opts);
}

}  // namespace

TEST_CASE("polar factorization of a smooth zero-free field", "[hydro]") {
    const SpatialGrid g(128, 10.0);
    const double L = g.length[0];
    // psi = sqrt(rho) e^{iS} with periodic smooth rho > 0 and S
    auto rho = [&](double x) { return (1.0 + 0.5 * std::cos(2.0 * kPi * x / L)) / L; };
    auto S = [&](double x) { return std::sin(2.0 * kPi * x / L); };
    auto dS = [&](double x) { return 2.0 * kPi / L * std::cos(2.0 * kPi * x / L); };
    const ComplexField psi = ComplexField::from_function(
        g, [&](double x) { return std::polar(std::sqrt(rho(x)), S(x)); });
    const PolarFactorization pf = polar_factorize(psi, 1e-8);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double x = g.coord(0, i);
        worst = std::max(worst, std::abs(pf.Lambda[0][i] - std::sqrt(rho(x)) * dS(x)));
        worst = std::max(worst, std::abs(pf.sqrt_rho[i] - std::sqrt(rho(x))));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("polar factorization of a plane wave", "[hydro]") {
    const SpatialGrid g(64, 8.0);
    const double L = g.length[0];
    const double k = 2.0 * kPi * 3.0 / L;
    const ComplexField psi = ComplexField::from_function(
        g, [&](double x) { return std::polar(1.0 / std::sqrt(L), k * x); });
    const PolarFactorization pf = polar_factorize(psi, 1e-8);
    for (std::size_t i = 0; i < g.points(); ++i) {
        CHECK(std::abs(pf.sqrt_rho[i] - 1.0 / std::sqrt(L)) < 1e-12);
        CHECK(std::abs(pf.Lambda[0][i] - k / std::sqrt(L)) < 1e-10);
        // sqrt(rho) Lambda = J = k/L
        const cx grad = spectral_gradient(psi)[0].v[i];
        const double J = std::imag(std::conj(psi.v[i]) * grad);
        CHECK(std::abs(pf.sqrt_rho[i] * pf.Lambda[0][i] - J) < 1e-12);
    }
}

TEST_CASE("polar tensor identity holds outside the vacuum", "[hydro]") {
    const SpatialGrid g(256, 20.0);
    // boosted gaussian with vacuum tails
    const ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        return std::polar(std::exp(-(x - 10.0) * (x - 10.0) / 2.0), 0.8 * (x - 10.0));
    }));
    const PolarFactorization pf = polar_factorize(psi, 1e-8);
    const ComplexField grad = spectral_gradient(psi)[0];
    const std::vector<double> da = hyd::real_derivative(pf.sqrt_rho, g);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        if (pf.sqrt_rho[i] < 1e-6) continue;
        const double lhs = std::norm(grad.v[i]);  // Re(grad conj psi * grad psi), 1-d
        const double rhs = da[i] * da[i] + pf.Lambda[0][i] * pf.Lambda[0][i];
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-8);

    // sqrt(rho) Lambda = J everywhere (both vanish in vacuum)
    double worstJ = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        const double J = std::imag(std::conj(psi.v[i]) * grad.v[i]);
        const double lhs = pf.sqrt_rho[i] * pf.Lambda[0][i];
        worstJ = std::max(worstJ, std::abs(lhs - (pf.sqrt_rho[i] >= 1e-8 ? J : 0.0)));
    }
    CHECK(worstJ < 1e-10);
}

TEST_CASE("hydro fields: identical pair and quarter rotation", "[hydro]") {
    const SpatialGrid g(128, 16.0);
    ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        return std::polar(std::exp(-(x - 8.0) * (x - 8.0) / 2.0), 0.6 * (x - 8.0));
    }));
    const HydroFields same = hydro_fields(psi, psi, 1e-8);
    for (std::size_t i = 0; i < g.points(); ++i) {
        CHECK(same.rho_d[i] == 0.0);
        CHECK(same.Jd[0][i] == 0.0);
        CHECK(std::abs(same.rho12[i] - same.rho1[i]) < 1e-15);
        CHECK(std::abs(same.J12[0][i] - same.J1[0][i]) < 1e-15);
        CHECK(std::abs(same.sigma12[i]) < 1e-15);
    }
    CHECK(std::abs(same.r12 - 1.0) < 1e-12);

    ComplexField ipsi = psi;
    for (cx& v : ipsi.v) v *= cx(0.0, 1.0);
    const HydroFields rot = hydro_fields(psi, ipsi, 1e-8);
    for (std::size_t i = 0; i < g.points(); ++i) {
        CHECK(std::abs(rot.rho12[i]) < 1e-15);
        CHECK(std::abs(rot.sigma12[i] - rot.rho1[i]) < 1e-14);
        CHECK(std::abs(rot.rho_a[i] - 2.0 * rot.rho1[i]) < 1e-13);
    }
    CHECK(std::abs(rot.s12 - 1.0) < 1e-12);
}

TEST_CASE("hydro linear recovery identities on a random pair", "[hydro]") {
    const SpatialGrid g(128, 16.0);
    auto tup = random_tuple(g, 2, 2718, 0.7);
    const HydroFields f = hydro_fields(tup[0], tup[1], 1e-8);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
        worst = std::max(worst, std::abs(f.rho12[i] - 0.5 * (f.rho1[i] + f.rho2[i] - f.rho_d[i])));
        worst = std::max(worst,
                         std::abs(f.J12[0][i] - 0.5 * (f.J1[0][i] + f.J2[0][i] - f.Jd[0][i])));
        worst = std::max(worst,
                         std::abs(f.sigma12[i] - (f.rho_a[i] - 0.5 * (f.rho1[i] + f.rho2[i]))));
        worst = std::max(worst,
                         std::abs(f.G12[0][i] - (f.Ja[0][i] - 0.5 * (f.J1[0][i] + f.J2[0][i]))));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("continuity residuals: free identical pair and coupled identical pair", "[hydro]") {
    const SpatialGrid g(256, 16.0);
    ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        return std::polar(std::exp(-(x - 8.0) * (x - 8.0) / 2.0), 0.8 * (x - 8.0));
    }));
    {
        // K = 0, harmonic V: free-Schrodinger continuity, residual O(dt_snap^2)
        EnsembleState s({psi, psi}, 0.0, Potential::harmonic(1.0, 8.0));
        SLOptions opts;
        opts.obs_every = 5;
        opts.snapshot_every = 5;
        const SLTrajectory traj = evolve(s, 0.5, 1e-3, opts);
        const ResidualReport rep = continuity_residuals(traj, 1e-8);
        CHECK(rep.max_norm.at("rho1") < 1e-5);
        CHECK(rep.max_norm.at("rho2") < 1e-5);
    }
    {
        // identical pair with K > 0: the rho_d equation reduces to 0 = 0
        EnsembleState s({psi, psi}, 1.0, Potential::harmonic(1.0, 8.0));
        SLOptions opts;
        opts.obs_every = 5;
        opts.snapshot_every = 5;
        const SLTrajectory traj = evolve(s, 0.5, 1e-3, opts);
        const ResidualReport rep = continuity_residuals(traj, 1e-8);
        CHECK(rep.max_norm.at("rho_d") < 1e-10);
        CHECK(rep.max_norm.at("rho1") < 1e-4);
    }
}

TEST_CASE("continuity residuals converge at second order in the snapshot step", "[hydro]") {
    const SLTrajectory fine = sync_trajectory(2.0, 5e-4, 10);   // dt_snap = 5e-3
    const SLTrajectory coarse = sync_trajectory(2.0, 5e-4, 20); // dt_snap = 1e-2
    const ResidualReport rf = continuity_residuals(fine, 1e-8);
    const ResidualReport rc = continuity_residuals(coarse, 1e-8);
    for (const char* eq : {"rho1", "rho2", "rho_d", "rho_a"}) {
        CHECK(rf.max_norm.at(eq) < 1e-4);
        const double ratio = rc.max_norm.at(eq) / rf.max_norm.at(eq);
        CHECK(ratio > 2.5);
        CHECK(ratio < 6.0);
    }
}

TEST_CASE("momentum residuals: plane-wave pair is exact", "[hydro]") {
    const SpatialGrid g(64, 8.0);
    const double L = g.length[0];
    const double k = 2.0 * kPi * 2.0 / L;
    const ComplexField psi = ComplexField::from_function(
        g, [&](double x) { return std::polar(1.0 / std::sqrt(L), k * x); });
    EnsembleState s({psi, psi}, 0.0, Potential::zero());
    SLOptions opts;
    opts.obs_every = 10;
    opts.snapshot_every = 10;
    const SLTrajectory traj = evolve(s, 0.1, 1e-3, opts);
    const ResidualReport rep = momentum_residuals(traj, 1e-8);
    for (const char* eq : {"J1", "J2", "J_a"}) CHECK(rep.max_norm.at(eq) < 1e-10);
    CHECK(rep.max_norm.at("J_d") == 0.0);  // empty mask
}

TEST_CASE("momentum residual of a free gaussian converges under refinement", "[hydro]") {
    const SpatialGrid g(256, 24.0);
    ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        return std::polar(std::exp(-(x - 12.0) * (x - 12.0) / 2.0), 1.0 * (x - 12.0));
    }));
    EnsembleState s({psi, psi}, 0.0, Potential::zero());
    auto run = [&](std::size_t every) {
        SLOptions opts;
        opts.obs_every = every;
        opts.snapshot_every = every;
        return evolve(s, 0.6, 5e-4, opts);
    };
    const ResidualReport rf = momentum_residuals(run(10), 1e-8);  // dt_snap 5e-3
    const ResidualReport rc = momentum_residuals(run(20), 1e-8);  // dt_snap 1e-2
    CHECK(rf.max_norm.at("J1") < 1e-2);
    CHECK(rc.max_norm.at("J1") / rf.max_norm.at("J1") > 2.0);
}

TEST_CASE("momentum residuals on a sync scenario stay within tolerance", "[hydro]") {
    const SLTrajectory traj = sync_trajectory(2.0, 5e-4, 10);
    const ResidualReport rep = momentum_residuals(traj, 1e-8);
    for (const auto& [eq, mx] : rep.max_norm) {
        INFO(eq);
        CHECK(mx < 1e-2);
    }
}

TEST_CASE("integrated rho_d balance matches the correlation dynamics", "[hydro]") {
    // d/dt int rho_d = -(K/2)(1+r12) int rho_d - K s12 int sigma12, checked
    // against centered differences of the stored snapshots
    const SLTrajectory traj = sync_trajectory(2.0, 5e-4, 5);
    const SpatialGrid& g = traj.initial.grid();
    auto integral = [&](const std::vector<double>& a) {
        double acc = 0.0;
        for (double x : a) acc += x;
        return acc * g.cell();
    };
    double worst = 0.0;
    for (std::size_t m = 1; m + 1 < traj.snapshots.size(); m += 16) {
        const HydroFields prev =
            hydro_fields(traj.snapshots[m - 1].psi[0], traj.snapshots[m - 1].psi[1], 1e-8);
        const HydroFields mid =
            hydro_fields(traj.snapshots[m].psi[0], traj.snapshots[m].psi[1], 1e-8);
        const HydroFields next =
            hydro_fields(traj.snapshots[m + 1].psi[0], traj.snapshots[m + 1].psi[1], 1e-8);
        const double dt = traj.snapshot_times[m] - traj.snapshot_times[m - 1];
        const double lhs = (integral(next.rho_d) - integral(prev.rho_d)) / (2.0 * dt);
        const double rhs = -0.5 * traj.K * (1.0 + mid.r12) * integral(mid.rho_d) -
                           traj.K * mid.s12 * integral(mid.sigma12);
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("global mass stays balanced along a coupled run", "[hydro]") {
    const SLTrajectory traj = sync_trajectory(3.0, 1e-3, 50);
    const SpatialGrid& g = traj.initial.grid();
    for (const EnsembleState& s : traj.snapshots) {
        const HydroFields f = hydro_fields(s.psi[0], s.psi[1], 1e-8);
        double acc = 0.0;
        for (double x : f.rho1) acc += x;
        CHECK(std::abs(acc * g.cell() - 1.0) < 1e-7);
    }
}

TEST_CASE("h1 sync check: identical, antipodal, decaying pair", "[hydro]") {
    const SpatialGrid g(128, 16.0);
    ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        return cx(std::exp(-(x - 8.0) * (x - 8.0) / 2.0), 0.0);
    }));
    {
        EnsembleState s({psi, psi}, 1.0, Potential::zero());
        SLOptions opts;
        opts.obs_every = 10;
        opts.snapshot_every = 10;
        const SLTrajectory traj = evolve(s, 0.3, 1e-3, opts);
        for (const SyncReport& r : h1_sync_check(traj))
            CHECK(r.status == SyncReport::Status::Pass);
    }
    {
        ComplexField neg = psi;
        for (cx& v : neg.v) v = -v;
        EnsembleState s({psi, neg}, 1.0, Potential::zero());
        SLOptions opts;
        opts.obs_every = 10;
        opts.snapshot_every = 10;
        const SLTrajectory traj = evolve(s, 0.3, 1e-3, opts);
        for (const SyncReport& r : h1_sync_check(traj)) {
            CHECK(r.status == SyncReport::Status::PreconditionUnmet);
            CHECK(r.hypothesis.at("not_antipodal") == false);
        }
    }
    {
        const SLTrajectory traj = sync_trajectory(8.0, 1e-3, 20, 2.0, cx(0.6, 0.3));
        for (const SyncReport& r : h1_sync_check(traj)) {
            INFO(r.observable);
            CHECK(r.status == SyncReport::Status::Pass);
        }
    }
}

TEST_CASE("residual preconditions are enforced", "[hydro]") {
    const SpatialGrid g(64, 12.0);
    auto pair = pair_with_overlap(g, cx(0.3, 0.1), 6.0, 1.0);
    EnsembleState s(pair, 1.0, Potential::zero());
    SLOptions opts;
    opts.obs_every = 10;
    opts.snapshot_every = 0;  // no snapshots stored
    const SLTrajectory traj = evolve(s, 0.1, 1e-3, opts);
    CHECK_THROWS_AS(continuity_residuals(traj, 1e-8), PreconditionError);

    SLOptions big;
    big.obs_every = 20;
    big.snapshot_every = 20;  // dt_snap = 2e-2 > 1e-2
    const SLTrajectory coarse = evolve(s, 0.2, 1e-3, big);
    CHECK_THROWS_AS(continuity_residuals(coarse, 1e-8), PreconditionError);
}
