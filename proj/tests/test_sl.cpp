#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "wlsim/corr.hpp"
#include "wlsim/initcond.hpp"
#include "wlsim/sl.hpp"

using namespace wlsim;

namespace {

EnsembleState identical_pair(const SpatialGrid& g, double K) {
    ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        const double c = 0.5 * g.length[0];
        return cx(std::exp(-(x - c) * (x - c) / 2.0), 0.0);
    }));
    return EnsembleState({psi, psi}, K, Potential::zero());
}

double variance(const ComplexField& f, double center) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.grid.n[0]; ++i) {
        const double u = f.grid.coord(0, i) - center;
        acc += u * u * std::norm(f.v[i]);
    }
    return acc * f.grid.cell();
}

double centroid(const ComplexField& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < f.grid.n[0]; ++i)
        acc += f.grid.coord(0, i) * std::norm(f.v[i]);
    return acc * f.grid.cell();
}

}  // namespace

TEST_CASE("coupling vanishes on a synchronized tuple", "[sl]") {
    const SpatialGrid g(64, 12.0);
    ComplexField psi = normalized(ComplexField::from_function(
        g, [&](double x) { return std::polar(std::exp(-(x - 6.0) * (x - 6.0) / 2.0), 0.4 * x); }));
    const EnsembleState s({psi, psi, psi}, 1.7, Potential::zero());
    for (const ComplexField& f : coupling_rhs(s))
        for (const cx& v : f.v) CHECK(std::abs(v) < 1e-13);
}

TEST_CASE("antipodal pair is an exact equilibrium of the coupling", "[sl]") {
    const SpatialGrid g(64, 12.0);
    ComplexField psi = normalized(ComplexField::from_function(
        g, [&](double x) { return cx(std::exp(-(x - 6.0) * (x - 6.0) / 2.0), 0.0); }));
    ComplexField neg = psi;
    for (cx& v : neg.v) v = -v;
    const EnsembleState s({psi, neg}, 2.0, Potential::zero());
    const auto rhs = coupling_rhs(s);
    for (const ComplexField& f : rhs)
        for (const cx& v : f.v) CHECK(v == cx(0.0, 0.0));
}

TEST_CASE("coupling for psi2 = i psi1 equals (iK/2) psi1", "[sl]") {
    const SpatialGrid g(64, 12.0);
    ComplexField psi = normalized(ComplexField::from_function(
        g, [&](double x) { return std::polar(std::exp(-(x - 6.0) * (x - 6.0) / 2.0), 0.3 * x); }));
    ComplexField ipsi = psi;
    for (cx& v : ipsi.v) v *= cx(0.0, 1.0);
    const double K = 1.3;
    const EnsembleState s({psi, ipsi}, K, Potential::zero());
    CHECK(std::abs(inner_product(s.psi[1], s.psi[0]) - cx(0.0, -1.0)) < 1e-13);

    const auto rhs = coupling_rhs(s);
    // symbolic value and a direct-summation oracle
    double worst = 0.0, worst_direct = 0.0;
    for (std::size_t i = 0; i < psi.v.size(); ++i) {
        worst = std::max(worst, std::abs(rhs[0].v[i] - cx(0.0, 0.5 * K) * psi.v[i]));
        cx direct = 0.0;
        for (std::size_t k = 0; k < 2; ++k)
            direct += s.psi[k].v[i] - inner_product(s.psi[k], s.psi[0]) * s.psi[0].v[i];
        direct *= K / 4.0;
        worst_direct = std::max(worst_direct, std::abs(rhs[0].v[i] - direct));
    }
    CHECK(worst < 1e-13);
    CHECK(worst_direct < 1e-13);
}

TEST_CASE("free dispersion reproduces the analytic variance growth", "[sl]") {
    const SpatialGrid g(512, 40.0);
    const double c = 20.0, a = 1.0;
    ComplexField psi = normalized(ComplexField::from_function(
        g, [&](double x) { return cx(std::exp(-(x - c) * (x - c) / (2 * a * a)), 0.0); }));
    EnsembleState s({psi, psi}, 0.0, Potential::zero());
    const double T = 1.0;
    EnsembleState cur = s;
    detail::SLStepper st(cur, 1e-3);
    for (int i = 0; i < 1000; ++i) st.step(cur, false);
    const double got = variance(cur.psi[0], c);
    CHECK(std::abs(got - oracle::free_gaussian_variance(a, T)) < 1e-8);
    CHECK(std::abs(l2_norm(cur.psi[0]) - 1.0) < 1e-10);
}

TEST_CASE("coherent state follows the classical center in a harmonic trap", "[sl]") {
    const SpatialGrid g(256, 16.0);
    const double omega = 1.0, c = 8.0, x0 = 1.0;
    const Potential V = Potential::harmonic(omega, c);
    ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        const double u = x - c - x0;
        return cx(std::exp(-omega * u * u / 2.0), 0.0);
    }));
    EnsembleState s({psi, psi}, 0.0, V);
    const double dt = 2.5e-4;
    const double T = 2.0 * kPi / omega;  // one period
    EnsembleState cur = s;
    detail::SLStepper st(cur, dt);
    const auto steps = static_cast<std::size_t>(std::llround(T / dt));
    double worst = 0.0;
    for (std::size_t i = 1; i <= steps; ++i) {
        st.step(cur, false);
        if (i % 500 == 0 || i == steps) {
            const double t = static_cast<double>(i) * dt;
            worst = std::max(worst,
                             std::abs(centroid(cur.psi[0]) - (c + x0 * std::cos(omega * t))));
        }
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("identical tuple stays identical under coupling", "[sl]") {
    const SpatialGrid g(128, 16.0);
    ComplexField psi = normalized(ComplexField::from_function(g, [&](double x) {
        return std::polar(std::exp(-(x - 8.0) * (x - 8.0) / 2.0), 0.5 * (x - 8.0));
    }));
    EnsembleState s({psi, psi, psi}, 2.0, Potential::harmonic(1.0, 8.0));
    EnsembleState cur = s;
    detail::SLStepper st(cur, 1e-3);
    for (int i = 0; i < 1000; ++i) st.step(cur, false);
    CHECK(diameter(cur) < 1e-12);
}

TEST_CASE("evolve with T = 0 yields only the initial snapshot", "[sl]") {
    const SpatialGrid g(64, 12.0);
    const EnsembleState s = identical_pair(g, 1.0);
    const SLTrajectory traj = evolve(s, 0.0, 1e-3, {});
    CHECK(traj.times.size() == 1);
    CHECK(traj.times[0] == 0.0);
}

TEST_CASE("norm conservation over a coupled run", "[sl]") {
    const SpatialGrid g(128, 16.0);
    auto pair = pair_with_overlap(g, cx(0.5, 0.2), 8.0, 1.0, 1.0);
    EnsembleState s(pair, 1.0, Potential::harmonic(1.0, 8.0));
    SLOptions opts;
    opts.obs_every = 20;
    const SLTrajectory traj = evolve(s, 1.0, 1e-3, opts);
    for (const auto& row : traj.norms)
        for (double n : row) CHECK(std::abs(n - 1.0) < 1e-8);
}

TEST_CASE("diameter: identical, antipodal, random, argmax tie-break", "[sl]") {
    const SpatialGrid g(64, 12.0);
    ComplexField u = normalized(ComplexField::from_function(
        g, [&](double x) { return cx(std::exp(-(x - 6.0) * (x - 6.0) / 2.0), 0.0); }));
    EnsembleState same({u, u}, 0.0, Potential::zero());
    CHECK(diameter(same) == 0.0);

    ComplexField nu = u;
    for (cx& v : nu.v) v = -v;
    EnsembleState anti({u, nu}, 0.0, Potential::zero());
    CHECK(diameter(anti) == Catch::Approx(2.0).epsilon(1e-12));

    auto tup = random_tuple(g, 3, 5, 0.6);
    EnsembleState rnd(tup, 0.0, Potential::zero());
    double expect = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            expect = std::max(expect, l2_distance(tup[i], tup[j]));
    CHECK(diameter(rnd) == expect);

    // duplicate antipodal pairs: ties at the maximum, first lexicographic wins
    EnsembleState tie({u, nu, u, nu}, 0.0, Potential::zero());
    const DiameterArgmax am = diameter_argmax(tie);
    CHECK(am.i == 0);
    CHECK(am.j == 1);
}

TEST_CASE("permutation equivariance is bitwise", "[sl]") {
    const SpatialGrid g(64, 12.0);
    auto tup = random_tuple(g, 3, 2024, 0.7);
    const double K = 1.2;
    const Potential V = Potential::harmonic(1.0, 6.0);

    EnsembleState a({tup[0], tup[1], tup[2]}, K, V);
    EnsembleState b({tup[2], tup[0], tup[1]}, K, V);  // b_j = a_{perm[j]}
    detail::SLStepper sa(a, 1e-3), sb(b, 1e-3);
    for (int i = 0; i < 25; ++i) {
        sa.step(a, false);
        sb.step(b, false);
    }
    const std::size_t perm[3] = {2, 0, 1};
    for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t i = 0; i < g.points(); ++i) {
            CHECK(b.psi[j].v[i].real() == a.psi[perm[j]].v[i].real());
            CHECK(b.psi[j].v[i].imag() == a.psi[perm[j]].v[i].imag());
        }
}

TEST_CASE("global phase covariance", "[sl]") {
    const SpatialGrid g(64, 12.0);
    auto tup = random_tuple(g, 2, 11, 0.7);
    const Potential V = Potential::harmonic(1.0, 6.0);
    EnsembleState a(tup, 1.0, V);
    auto rotated = tup;
    const cx phase = std::polar(1.0, 1.234);
    for (auto& f : rotated)
        for (cx& v : f.v) v *= phase;
    EnsembleState b(rotated, 1.0, V);

    detail::SLStepper sa(a, 1e-3), sb(b, 1e-3);
    for (int i = 0; i < 200; ++i) {
        sa.step(a, false);
        sb.step(b, false);
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < 2; ++j)
        for (std::size_t i = 0; i < g.points(); ++i)
            worst = std::max(worst, std::abs(b.psi[j].v[i] - phase * a.psi[j].v[i]));
    CHECK(worst < 1e-12);
    CHECK(std::abs(diameter(a) - diameter(b)) < 1e-12);
    CHECK(std::abs(correlations(a).at(0, 1) - correlations(b).at(0, 1)) < 1e-12);
}

TEST_CASE("strang step converges at second order", "[sl]") {
    const SpatialGrid g(128, 16.0);
    auto pair = pair_with_overlap(g, cx(0.4, 0.3), 8.0, 1.0, 1.0);
    const Potential V = Potential::harmonic(1.5, 8.0);
    const double K = 1.0, T = 0.5;

    auto final_state = [&](double dt) {
        EnsembleState s(pair, K, V);
        detail::SLStepper st(s, dt);
        const auto steps = static_cast<std::size_t>(std::llround(T / dt));
        for (std::size_t i = 0; i < steps; ++i) st.step(s, false);
        return s;
    };
    const EnsembleState ref = final_state(1.25e-4);  // dt/8 reference
    auto err = [&](double dt) {
        const EnsembleState s = final_state(dt);
        double e = 0.0;
        for (std::size_t j = 0; j < 2; ++j) e = std::max(e, l2_distance(s.psi[j], ref.psi[j]));
        return e;
    };
    const double e1 = err(1e-3), e2 = err(5e-4);
    const double order = std::log2(e1 / e2);
    CHECK(order > 1.7);
    CHECK(order < 2.4);
}

TEST_CASE("step preconditions and the renormalize escape hatch", "[sl]") {
    const SpatialGrid g(64, 12.0);
    EnsembleState s = identical_pair(g, 1.0);
    CHECK_THROWS_AS(step(s, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(evolve(s, 1.0, 0.6 /* dt*K = 0.6 */, {}), std::invalid_argument);

    EnsembleState v = identical_pair(g, 0.0);
    v.V = Potential::constant(600.0);  // dt * max|V| >= 0.5 at dt = 1e-3
    CHECK_THROWS_AS(evolve(v, 0.01, 1e-3, {}), std::invalid_argument);

    SLOptions opts;
    opts.renormalize = true;
    auto pair = pair_with_overlap(g, cx(0.5, 0.0), 6.0, 1.0);
    const SLTrajectory traj = evolve(EnsembleState(pair, 1.0, Potential::zero()), 0.2, 1e-3, opts);
    for (const auto& row : traj.norms)
        for (double n : row) CHECK(std::abs(n - 1.0) < 1e-14);
}

TEST_CASE("two-dimensional evolution: norms and free variance", "[sl]") {
    const SpatialGrid g(32, 12.0, 32, 12.0);
    ComplexField psi = normalized(ComplexField::from_function2(g, [&](double x, double y) {
        const double ux = x - 6.0, uy = y - 6.0;
        return cx(std::exp(-(ux * ux + uy * uy) / 2.0), 0.0);
    }));
    EnsembleState s({psi, psi}, 0.7, Potential::harmonic(1.0, 6.0, 6.0));
    SLOptions opts;
    opts.obs_every = 20;
    const SLTrajectory traj = evolve(s, 0.4, 1e-3, opts);
    for (const auto& row : traj.norms)
        for (double n : row) CHECK(std::abs(n - 1.0) < 1e-9);
    CHECK(diameter(EnsembleState(s.psi, 0.7, s.V)) == 0.0);

    // free dispersion in 2d: per-axis variance follows the 1d law
    EnsembleState fr({psi, psi}, 0.0, Potential::zero());
    detail::SLStepper st(fr, 1e-3);
    for (int i = 0; i < 400; ++i) st.step(fr, false);
    double var_x = 0.0;
    for (std::size_t i0 = 0; i0 < g.n[0]; ++i0)
        for (std::size_t i1 = 0; i1 < g.n[1]; ++i1) {
            const double u = g.coord(0, i0) - 6.0;
            var_x += u * u * std::norm(fr.psi[0].v[g.index(i0, i1)]);
        }
    var_x *= g.cell();
    CHECK(std::abs(var_x - oracle::free_gaussian_variance(1.0, 0.4)) < 1e-8);
}

TEST_CASE("observers sample without mutating the state", "[sl]") {
    const SpatialGrid g(64, 12.0);
    auto pair = pair_with_overlap(g, cx(0.2, 0.1), 6.0, 1.0);
    EnsembleState s(pair, 1.0, Potential::zero());
    std::size_t calls = 0;
    SLOptions opts;
    opts.obs_every = 10;
    opts.observers.push_back([&](const EnsembleState& st, std::size_t) {
        ++calls;
        CHECK(st.size() == 2);
    });
    const SLTrajectory traj = evolve(s, 0.1, 1e-3, opts);
    CHECK(calls == traj.times.size());
}
