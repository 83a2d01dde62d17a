#pragma once

#include <chrono>
#include <filesystem>
#include <unistd.h>

#include <json.hpp>

#include "wlsim/corr.hpp"
#include "wlsim/csv.hpp"
#include "wlsim/hydro.hpp"
#include "wlsim/scenario.hpp"
#include "wlsim/snapshot.hpp"

namespace wlsim {

struct CheckOutcome {
    std::string name;
    std::string status;  // pass | fail | precondition_unmet
    nlohmann::json detail;

    bool passed() const { return status == "pass"; }
};

struct RunManifest {
    std::string scenario_name;
    std::uint64_t hash = 0;
    std::string version = kVersion;
    double wall_ms = 0.0;
    std::vector<std::string> outputs;
    std::vector<CheckOutcome> checks;
    bool overall_pass = true;
    std::filesystem::path run_dir;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["scenario"] = scenario_name;
        char hex[32];
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
        j["scenario_hash"] = hex;
        j["version"] = version;
        j["wall_ms"] = wall_ms;
        j["outputs"] = outputs;
        nlohmann::json arr = nlohmann::json::array();
        for (const CheckOutcome& c : checks) {
            nlohmann::json e = c.detail;
            e["check"] = c.name;
            e["status"] = c.status;
            arr.push_back(std::move(e));
        }
        j["checks"] = arr;
        j["overall_pass"] = overall_pass;
        return j;
    }
};

namespace runner_detail {

inline std::string hash_hex(std::uint64_t h) {
    char hex[32];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

inline CheckOutcome from_sync_report(const std::string& name, const SyncReport& r) {
    return {name, to_string(r.status), to_json(r)};
}

// The Theorem 4.1 verification on a Wigner-Lohe trajectory: the fitted tail
// rate of ||w1 - w2||^2 must sit within 10% of K, and after the transient
// (t >= 1) the centered log-derivative of the squared distance must track
// -K r12(t) within 2% of K r12.
inline SyncReport check_wl_decay(const WLTrajectory& traj,
                                 double rate_frac = tol::rate_window_frac,
                                 double logderiv_frac = 0.02, double transient = 1.0) {
    SyncReport rep;
    rep.observable = "w_dist2";
    rep.target_rate = traj.K;
    if (traj.n_osc != 2) {
        rep.status = SyncReport::Status::PreconditionUnmet;
        rep.note = "two-oscillator runs only";
        return rep;
    }
    const cx z0 = traj.z_upper.front()[0];
    const bool admissible = std::abs(z0) <= 1.0 + 1e-9 && std::abs(z0 + cx(1.0, 0.0)) > 1e-12;
    rep.hypothesis["initial_integral_admissible"] = admissible;
    rep.hypothesis["momentum_band_ok"] = traj.momentum_band_ok;
    if (!admissible) {
        rep.status = SyncReport::Status::PreconditionUnmet;
        rep.note = "initial pair integral outside Lemma hypotheses";
        return rep;
    }

    const double K = traj.K;
    const double tend = traj.times.back();
    bool rate_ok = false;
    try {
        const RateFit f = fit_rate(traj.times, traj.dist2, 0.5 * tend, tend);
        rep.fitted_rate = f.rate;
        rep.amplitude = f.amplitude;
        rep.residual = f.residual;
        rep.window_t0 = f.t0;
        rep.window_t1 = f.t1;
        rate_ok = std::abs(f.rate - K) <= rate_frac * K;
    } catch (const PreconditionError&) {
        rep.below_floor = true;
        rate_ok = true;
    }

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < traj.times.size(); ++i) {
        if (traj.times[i] < transient) continue;
        if (traj.dist2[i - 1] <= tol::series_floor || traj.dist2[i + 1] <= tol::series_floor)
            continue;
        const double ld = (std::log(traj.dist2[i + 1]) - std::log(traj.dist2[i - 1])) /
                          (traj.times[i + 1] - traj.times[i - 1]);
        const double target = -K * traj.z_upper[i][0].real();
        const double scale = std::max(std::abs(target), 1e-6);
        worst = std::max(worst, std::abs(ld - target) / scale);
    }
    rep.hypothesis["logderiv_within_2pct"] = worst <= logderiv_frac;
    rep.note = "max relative log-derivative mismatch " + std::to_string(worst);
    rep.status = (rate_ok && worst <= logderiv_frac) ? SyncReport::Status::Pass
                                                     : SyncReport::Status::Fail;
    return rep;
}

}  // namespace runner_detail

// Cross-validation of the two formulations on one scenario: evolve the S-L
// system, push its snapshots through the Wigner transform, evolve the
// Wigner-Lohe system from the transformed initial data, and measure L^2
// discrepancies of (w1, w2, w12) plus the z12 series on the shared sample
// times.
struct CompareReport {
    double max_w1 = 0.0, max_w2 = 0.0, max_w12 = 0.0, max_z12 = 0.0;
    double tolerance = tol::pipeline_discrepancy;
    bool pass = false;

    double max_field() const { return std::max({max_w1, max_w2, max_w12}); }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["max_w1"] = max_w1;
        j["max_w2"] = max_w2;
        j["max_w12"] = max_w12;
        j["max_z12"] = max_z12;
        j["tolerance"] = tolerance;
        j["pass"] = pass;
        return j;
    }
};

inline CompareReport compare_pipelines(const Scenario& scn,
                                       double tolerance = tol::pipeline_discrepancy) {
    if (scn.n_osc != 2) throw PreconditionError("compare: two-oscillator scenarios only");
    EnsembleState s0 = make_sl_state(scn);
    if (!s0.identical_potentials())
        throw PreconditionError("compare: potentials must be identical");

    const std::size_t every = scn.obs_every == 0 ? 1 : scn.obs_every;
    SLOptions slo;
    slo.obs_every = every;
    slo.snapshot_every = every;
    const SLTrajectory sl = evolve(s0, scn.t_final, scn.dt, slo);

    const PhaseGrid pg(s0.grid());
    WignerLoheState w0 = make_wigner_lohe_state(s0.psi, scn.coupling, scn.potential, pg);
    WLOptions wlo;
    wlo.obs_every = every;
    wlo.snapshot_every = every;
    const WLTrajectory wl = evolve_wl(w0, scn.t_final, scn.dt, wlo);

    if (sl.snapshots.size() != wl.snapshots.size())
        throw std::runtime_error("compare: pipelines sampled differently");

    CompareReport rep;
    rep.tolerance = tolerance;
    for (std::size_t m = 0; m < sl.snapshots.size(); ++m) {
        const EnsembleState& es = sl.snapshots[m];
        const WignerLoheState& ws = wl.snapshots[m];
        const WignerField t1 = wigner_transform(es.psi[0], pg);
        const WignerField t2 = wigner_transform(es.psi[1], pg);
        const WignerField t12 = wigner_transform(es.psi[0], es.psi[1], pg);
        auto l2diff = [&](const WignerField& a, const WignerField& b) {
            std::vector<double> terms(a.v.size());
            for (std::size_t i = 0; i < a.v.size(); ++i) terms[i] = std::norm(a.v[i] - b.v[i]);
            return std::sqrt(pairwise_sum(std::span<const double>(terms)) * pg.cell());
        };
        rep.max_w1 = std::max(rep.max_w1, l2diff(t1, ws.diag[0]));
        rep.max_w2 = std::max(rep.max_w2, l2diff(t2, ws.diag[1]));
        rep.max_w12 = std::max(rep.max_w12, l2diff(t12, ws.off[0]));
        const cx z_sl = inner_product(es.psi[0], es.psi[1]);
        const cx z_wl = phase_integral(ws.off[0]);
        rep.max_z12 = std::max(rep.max_z12, std::abs(z_sl - z_wl));
    }
    rep.pass = rep.max_field() < tolerance && rep.max_z12 < tolerance;
    return rep;
}

// Hydro CSV over the interior snapshot times:
// t, mass1, mass2, r12, s12, rho_d_int, h1_dist, grad_sqrho_d, lambda_d,
// resid_rho1..resid_Ja.
inline std::string hydro_csv(const SLTrajectory& traj, const ResidualReport& cont,
                             const ResidualReport& mom, double eps) {
    const SpatialGrid& g = traj.initial.grid();
    std::string out =
        "t,mass1,mass2,r12,s12,rho_d_int,h1_dist,grad_sqrho_d,lambda_d,"
        "resid_rho1,resid_rho2,resid_rho_d,resid_rho_a,resid_J1,resid_J2,resid_J_d,resid_J_a\n";
    for (std::size_t m = 0; m < cont.times.size(); ++m) {
        const EnsembleState& s = traj.snapshots[m + 1];
        const HydroFields f = hydro_fields(s.psi[0], s.psi[1], eps);
        auto integral = [&](const std::vector<double>& a) {
            double acc = 0.0;
            for (double x : a) acc += x;
            return acc * g.cell();
        };
        auto l2 = [&](const std::vector<double>& a) {
            double acc = 0.0;
            for (double x : a) acc += x * x;
            return std::sqrt(acc * g.cell());
        };
        ComplexField psid(g);
        for (std::size_t i = 0; i < g.points(); ++i) psid.v[i] = s.psi[0].v[i] - s.psi[1].v[i];
        out += csvio::num(cont.times[m]);
        out += "," + csvio::num(integral(f.rho1));
        out += "," + csvio::num(integral(f.rho2));
        out += "," + csvio::num(f.r12);
        out += "," + csvio::num(f.s12);
        out += "," + csvio::num(integral(f.rho_d));
        out += "," + csvio::num(h1_norm(psid));
        out += "," + csvio::num(l2(f.grad_sqrt_rho_d[0]));
        out += "," + csvio::num(l2(f.Lambda_d[0]));
        for (const char* eq : {"rho1", "rho2", "rho_d", "rho_a"})
            out += "," + csvio::num(cont.series.at(eq)[m]);
        for (const char* eq : {"J1", "J2", "J_d", "J_a"})
            out += "," + csvio::num(mom.series.at(eq)[m]);
        out += "\n";
    }
    return out;
}

namespace runner_detail {

inline CheckOutcome residual_outcome(const std::string& name, const ResidualReport& rep,
                                     double tolerance) {
    nlohmann::json j;
    j["dt_snap"] = rep.dt_snap;
    j["tolerance"] = tolerance;
    bool ok = true;
    for (const auto& [eq, mx] : rep.max_norm) {
        j["max"][eq] = mx;
        if (!(mx < tolerance)) ok = false;
    }
    return {name, ok ? "pass" : "fail", j};
}

inline void run_sl_checks(const Scenario& scn, const SLTrajectory& traj, RunManifest& man) {
    for (const std::string& name : scn.checks) {
        if (name == "norm_conservation") {
            const double tolv = scn.check_param("norm_conservation.tol", tol::norm_drift);
            double drift = 0.0;
            for (const auto& row : traj.norms)
                for (double nv : row) drift = std::max(drift, std::abs(nv - 1.0));
            nlohmann::json j;
            j["max_drift"] = drift;
            j["tolerance"] = tolv;
            man.checks.push_back({name, drift < tolv ? "pass" : "fail", j});
        } else if (name == "diameter_bound") {
            man.checks.push_back(from_sync_report(
                name, check_diameter_bound(traj,
                                           scn.check_param("diameter_bound.slack", tol::bound_slack),
                                           scn.check_param("diameter_bound.rate_frac",
                                                           tol::rate_window_frac))));
        } else if (name == "correlation_decay") {
            const auto reps = check_correlation_decay(
                traj, scn.check_param("correlation_decay.rate_frac", tol::rate_window_frac));
            for (const SyncReport& r : reps) {
                std::string nm = name + "_" + std::to_string(r.pair_i + 1) +
                                 std::to_string(r.pair_j + 1);
                man.checks.push_back(from_sync_report(nm, r));
            }
        } else if (name == "correlation_closed_form") {
            if (traj.n_osc != 2)
                throw PreconditionError("correlation_closed_form: two oscillators only");
            const cx z0 = traj.corr.front().at(0, 1);
            double worst = 0.0;
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                worst = std::max(worst, std::abs(traj.corr[i].at(0, 1) -
                                                 z12_closed_form(z0, traj.K,
                                                                 traj.times[i] - traj.times[0])));
            const double tolv =
                scn.check_param("correlation_closed_form.tol", tol::corr_closed_form);
            nlohmann::json j;
            j["max_error"] = worst;
            j["tolerance"] = tolv;
            man.checks.push_back({name, worst < tolv ? "pass" : "fail", j});
        } else if (name == "h1_sync") {
            for (const SyncReport& r : h1_sync_check(traj, scn.eps))
                man.checks.push_back(from_sync_report("h1_sync_" + r.observable, r));
        } else if (name == "continuity_residuals") {
            man.checks.push_back(residual_outcome(
                name, continuity_residuals(traj, scn.eps),
                scn.check_param("continuity_residuals.tol", tol::continuity_residual)));
        } else if (name == "momentum_residuals") {
            man.checks.push_back(residual_outcome(
                name, momentum_residuals(traj, scn.eps),
                scn.check_param("momentum_residuals.tol", tol::momentum_residual)));
        } else {
            throw ConfigError("config: unknown check '" + name + "' for an sl scenario");
        }
    }
}

}  // namespace runner_detail

// Executes a scenario and writes the run directory
//   <out>/runs/<name>-<hash>/{config.snapshot, observables.csv, fields/, report.json}
// atomically (populate a temp dir, then rename).
inline RunManifest run(const Scenario& scn, const std::filesystem::path& out_root) {
    namespace fs = std::filesystem;
    const auto t_begin = std::chrono::steady_clock::now();

    RunManifest man;
    man.scenario_name = scn.name;
    man.hash = scenario_hash(scn);

    const fs::path runs = out_root / "runs";
    fs::create_directories(runs);
    const std::string dirname = scn.name + "-" + runner_detail::hash_hex(man.hash);
    const fs::path tmp = runs / (".tmp-" + dirname + "-" + std::to_string(::getpid()));
    fs::create_directories(tmp);
    fs::create_directories(tmp / "fields");

    write_text(tmp / "config.snapshot", canonical_text(scn));
    man.outputs.push_back("config.snapshot");

    if (scn.model == "sl") {
        EnsembleState s0 = make_sl_state(scn);
        SLOptions opts;
        opts.obs_every = scn.obs_every;
        opts.snapshot_every = scn.snapshot_every;
        opts.renormalize = scn.renormalize;
        const SLTrajectory traj = evolve(s0, scn.t_final, scn.dt, opts);
        write_text(tmp / "observables.csv", sl_observables_csv(traj));
        man.outputs.push_back("observables.csv");
        if (scn.snapshot_every > 0) {
            for (std::size_t m = 0; m < traj.snapshots.size(); ++m) {
                const auto stepno = static_cast<std::size_t>(
                    std::llround(traj.snapshot_times[m] / scn.dt));
                for (std::size_t j = 0; j < traj.n_osc; ++j) {
                    char nm[64];
                    std::snprintf(nm, sizeof(nm), "step_%08zu_psi%zu.bin", stepno, j + 1);
                    write_snapshot(tmp / "fields" / nm, traj.snapshots[m].psi[j]);
                }
            }
            man.outputs.push_back("fields/");
        }
        const bool wants_hydro_csv =
            std::find(scn.checks.begin(), scn.checks.end(), std::string("continuity_residuals")) !=
                scn.checks.end() &&
            std::find(scn.checks.begin(), scn.checks.end(), std::string("momentum_residuals")) !=
                scn.checks.end();
        runner_detail::run_sl_checks(scn, traj, man);
        if (wants_hydro_csv) {
            const ResidualReport cont = continuity_residuals(traj, scn.eps);
            const ResidualReport mom = momentum_residuals(traj, scn.eps);
            write_text(tmp / "hydro.csv", hydro_csv(traj, cont, mom, scn.eps));
            man.outputs.push_back("hydro.csv");
        }
    } else if (scn.model == "wl") {
        EnsembleState s0 = make_sl_state(scn);
        const PhaseGrid pg(s0.grid());
        WignerLoheState w0 = make_wigner_lohe_state(s0.psi, scn.coupling, scn.potential, pg);
        WLOptions opts;
        opts.obs_every = scn.obs_every;
        opts.snapshot_every = scn.snapshot_every;
        const WLTrajectory traj = evolve_wl(w0, scn.t_final, scn.dt, opts);
        write_text(tmp / "observables.csv", wl_observables_csv(traj));
        man.outputs.push_back("observables.csv");
        if (scn.snapshot_every > 0) {
            for (std::size_t m = 0; m < traj.snapshots.size(); ++m) {
                const auto stepno = static_cast<std::size_t>(
                    std::llround(traj.snapshot_times[m] / scn.dt));
                const WignerLoheState& ws = traj.snapshots[m];
                char nm[80];
                for (std::size_t j = 0; j < traj.n_osc; ++j) {
                    std::snprintf(nm, sizeof(nm), "step_%08zu_w%zu.bin", stepno, j + 1);
                    write_snapshot(tmp / "fields" / nm, ws.diag[j], /*as_real=*/true);
                }
                for (std::size_t j = 0; j < traj.n_osc; ++j)
                    for (std::size_t k = j + 1; k < traj.n_osc; ++k) {
                        std::snprintf(nm, sizeof(nm), "step_%08zu_w%zu%zu.bin", stepno, j + 1,
                                      k + 1);
                        write_snapshot(
                            tmp / "fields" / nm,
                            ws.off[WignerLoheState::pair_index(j, k, traj.n_osc)],
                            /*as_real=*/false);
                    }
            }
            man.outputs.push_back("fields/");
        }
        for (const std::string& name : scn.checks) {
            if (name == "wl_decay") {
                man.checks.push_back(runner_detail::from_sync_report(
                    name, runner_detail::check_wl_decay(
                              traj, scn.check_param("wl_decay.rate_frac", tol::rate_window_frac),
                              scn.check_param("wl_decay.logderiv_frac", 0.02))));
            } else if (name == "wl_closed_form") {
                const cx z0 = traj.z_upper.front()[0];
                double worst = 0.0;
                for (std::size_t i = 0; i < traj.times.size(); ++i)
                    worst = std::max(worst,
                                     std::abs(traj.z_upper[i][0] -
                                              z12_closed_form(z0, traj.K, traj.times[i])));
                const double tolv = scn.check_param("wl_closed_form.tol", 1e-5);
                nlohmann::json j;
                j["max_error"] = worst;
                j["tolerance"] = tolv;
                man.checks.push_back({name, worst < tolv ? "pass" : "fail", j});
            } else if (name == "mass_conservation") {
                double drift = 0.0;
                for (const auto& row : traj.masses)
                    for (double m : row) drift = std::max(drift, std::abs(m - 1.0));
                const double tolv = scn.check_param("mass_conservation.tol", 1e-6);
                nlohmann::json j;
                j["max_drift"] = drift;
                j["tolerance"] = tolv;
                man.checks.push_back({name, drift < tolv ? "pass" : "fail", j});
            } else {
                throw ConfigError("config: unknown check '" + name + "' for a wl scenario");
            }
        }
    } else if (scn.model == "kuramoto") {
        const KuramotoState k0 = make_kuramoto_state(scn);
        const KuramotoTrajectory traj = evolve_kuramoto(k0, scn.t_final, scn.dt, scn.obs_every);
        write_text(tmp / "observables.csv", kuramoto_csv(traj));
        man.outputs.push_back("observables.csv");
        for (const std::string& name : scn.checks) {
            if (name == "pair_exact") {
                if (traj.omega.size() != 2 || traj.omega[0] != 0.0 || traj.omega[1] != 0.0)
                    throw PreconditionError("pair_exact: needs N = 2 with zero frequencies");
                const double d0 = traj.theta.front()[1] - traj.theta.front()[0];
                double worst = 0.0;
                for (std::size_t i = 0; i < traj.times.size(); ++i) {
                    const double d = traj.theta[i][1] - traj.theta[i][0];
                    worst = std::max(worst,
                                     std::abs(d - kuramoto_pair_gap(d0, traj.K, traj.times[i])));
                }
                const double tolv = scn.check_param("pair_exact.tol", 1e-8);
                nlohmann::json j;
                j["max_error"] = worst;
                j["tolerance"] = tolv;
                man.checks.push_back({name, worst < tolv ? "pass" : "fail", j});
            } else {
                throw ConfigError("config: unknown check '" + name + "' for a kuramoto scenario");
            }
        }
    } else {
        throw ConfigError("config: unknown model " + scn.model);
    }

    man.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            t_begin)
                      .count();
    man.overall_pass = true;
    for (const CheckOutcome& c : man.checks)
        if (!c.passed()) man.overall_pass = false;

    man.outputs.push_back("report.json");
    write_text(tmp / "report.json", man.to_json().dump(2) + "\n");

    const fs::path final_dir = runs / dirname;
    if (fs::exists(final_dir)) fs::remove_all(final_dir);
    fs::rename(tmp, final_dir);
    man.run_dir = final_dir;
    return man;
}

}  // namespace wlsim
