// wlsim: quantum-synchronization simulation suite.
// Subcommands: run-sl, run-wl, run-kuramoto, transform, hydro, compare, report.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "wlsim/wlsim.hpp"

namespace fs = std::filesystem;
using namespace wlsim;

namespace {

struct RunArgs {
    std::vector<std::string> configs;
    std::string out = ".";
    std::uint64_t seed = 0;
    bool has_seed = false;
    unsigned jobs = 1;
    long snapshot_every = -1;
};

void add_run_options(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("--config", args.configs, "scenario config file(s)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out, "output root (runs/ is created beneath it)");
    cmd->add_option("--seed", args.seed, "override the scenario seed")
        ->each([&args](const std::string&) { args.has_seed = true; });
    cmd->add_option("--jobs", args.jobs, "run disjoint scenarios in parallel processes");
    cmd->add_option("--snapshot-every", args.snapshot_every,
                    "override the field snapshot cadence (steps)");
}

Scenario load_with_overrides(const std::string& path, const RunArgs& args,
                             const std::string& expected_model) {
    Scenario scn = load_scenario_file(path);
    if (scn.model != expected_model)
        throw ConfigError("config: " + path + " declares model '" + scn.model +
                          "' but the subcommand expects '" + expected_model + "'");
    if (args.has_seed) {
        scn.seed = args.seed;
        scn.has_seed = true;
    }
    if (args.snapshot_every >= 0) scn.snapshot_every = static_cast<std::size_t>(args.snapshot_every);
    return scn;
}

int run_one(const Scenario& scn, const std::string& out) {
    const RunManifest man = run(scn, out);
    std::printf("%s  [%s]  %s\n", man.run_dir.string().c_str(),
                man.overall_pass ? "pass" : "FAIL", scn.name.c_str());
    for (const CheckOutcome& c : man.checks)
        std::printf("  %-34s %s\n", c.name.c_str(), c.status.c_str());
    return man.overall_pass ? 0 : 1;
}

// Scenarios are independent: with --jobs n they execute in separate forked
// processes, each writing its own run directory.
int run_many(const RunArgs& args, const std::string& expected_model) {
    std::vector<Scenario> scenarios;
    for (const std::string& path : args.configs)
        scenarios.push_back(load_with_overrides(path, args, expected_model));

    if (args.jobs <= 1 || scenarios.size() <= 1) {
        int rc = 0;
        for (const Scenario& scn : scenarios) rc |= run_one(scn, args.out);
        return rc;
    }

    std::vector<pid_t> active;
    int rc = 0;
    auto reap_one = [&]() {
        int status = 0;
        const pid_t pid = ::wait(&status);
        if (pid > 0) {
            active.erase(std::remove(active.begin(), active.end(), pid), active.end());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) rc = 1;
        }
    };
    for (const Scenario& scn : scenarios) {
        while (active.size() >= args.jobs) reap_one();
        const pid_t pid = ::fork();
        if (pid < 0) throw std::runtime_error("fork failed");
        if (pid == 0) {
            try {
                _exit(run_one(scn, args.out));
            } catch (const std::exception& e) {
                std::fprintf(stderr, "error: %s\n", e.what());
                _exit(2);
            }
        }
        active.push_back(pid);
    }
    while (!active.empty()) reap_one();
    return rc;
}

int cmd_transform(const std::string& in1, const std::string& in2, const std::string& out) {
    const ComplexField psi1 = read_complex_field(in1);
    if (psi1.grid.dim != 1) throw std::runtime_error("transform: d = 1 snapshots only");
    const PhaseGrid pg(psi1.grid);
    fs::create_directories(out);

    const WignerField w1 = wigner_transform(psi1, pg);
    write_snapshot(fs::path(out) / "w1.bin", w1, /*as_real=*/true);
    std::printf("w1.bin   mass = %.12g\n", phase_mass(w1));
    if (!in2.empty()) {
        const ComplexField psi2 = read_complex_field(in2);
        const WignerField w2 = wigner_transform(psi2, pg);
        const WignerField w12 = wigner_transform(psi1, psi2, pg);
        write_snapshot(fs::path(out) / "w2.bin", w2, /*as_real=*/true);
        write_snapshot(fs::path(out) / "w12.bin", w12, /*as_real=*/false);
        const cx z = phase_integral(w12);
        std::printf("w2.bin   mass = %.12g\n", phase_mass(w2));
        std::printf("w12.bin  integral = %.12g %+.12gi\n", z.real(), z.imag());
    }
    return 0;
}

// Rebuild an S-L trajectory from a stored run directory (config.snapshot +
// fields/) and emit the hydrodynamic CSV and residual report.
int cmd_hydro(const std::string& run_dir, std::string out, double eps) {
    if (out.empty()) out = run_dir;
    const Scenario scn = load_scenario_file((fs::path(run_dir) / "config.snapshot").string());
    if (scn.model != "sl") throw std::runtime_error("hydro: run directory is not an sl run");
    if (scn.n_osc != 2) throw std::runtime_error("hydro: two-oscillator runs only");

    std::vector<std::size_t> steps;
    for (const auto& entry : fs::directory_iterator(fs::path(run_dir) / "fields")) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = "_psi1.bin";
        if (name.rfind("step_", 0) != 0 || name.size() <= 5 + suffix.size()) continue;
        if (name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
        steps.push_back(std::stoull(name.substr(5, name.size() - 5 - suffix.size())));
    }
    std::sort(steps.begin(), steps.end());
    if (steps.size() < 3) throw std::runtime_error("hydro: need at least three snapshots");

    SLTrajectory traj;
    traj.dt = scn.dt;
    traj.K = scn.coupling;
    traj.n_osc = 2;
    traj.V = scn.potential;
    traj.omega_offsets = scn.omega_offsets;
    traj.initial = make_sl_state(scn);
    for (std::size_t stepno : steps) {
        char n1[64], n2[64];
        std::snprintf(n1, sizeof(n1), "step_%08zu_psi1.bin", stepno);
        std::snprintf(n2, sizeof(n2), "step_%08zu_psi2.bin", stepno);
        std::vector<ComplexField> psi;
        psi.push_back(read_complex_field(fs::path(run_dir) / "fields" / n1));
        psi.push_back(read_complex_field(fs::path(run_dir) / "fields" / n2));
        const double t = static_cast<double>(stepno) * scn.dt;
        traj.snapshots.emplace_back(std::move(psi), scn.coupling, scn.potential,
                                    scn.omega_offsets, t, 1e-6);
        traj.snapshot_times.push_back(t);
    }

    const ResidualReport cont = continuity_residuals(traj, eps);
    const ResidualReport mom = momentum_residuals(traj, eps);
    write_text(fs::path(out) / "hydro.csv", hydro_csv(traj, cont, mom, eps));

    nlohmann::json j;
    j["dt_snap"] = cont.dt_snap;
    for (const auto& [eq, mx] : cont.max_norm) j["continuity"][eq] = mx;
    for (const auto& [eq, mx] : mom.max_norm) j["momentum"][eq] = mx;
    for (const SyncReport& r : h1_sync_check(traj, eps)) j["h1_sync"][r.observable] = to_json(r);
    write_text(fs::path(out) / "hydro_report.json", j.dump(2) + "\n");
    std::printf("hydro.csv and hydro_report.json written to %s\n", out.c_str());
    for (const auto& [eq, mx] : cont.max_norm) std::printf("  continuity %-6s %.3e\n", eq.c_str(), mx);
    for (const auto& [eq, mx] : mom.max_norm) std::printf("  momentum   %-6s %.3e\n", eq.c_str(), mx);
    return 0;
}

int cmd_compare(const std::string& config, const std::string& out, double tolerance) {
    Scenario scn = load_scenario_file(config);
    const CompareReport rep = compare_pipelines(scn, tolerance);
    fs::create_directories(out);
    const fs::path path = fs::path(out) / ("compare-" + scn.name + ".json");
    write_text(path, rep.to_json().dump(2) + "\n");
    std::printf("max |w1|  discrepancy: %.3e\n", rep.max_w1);
    std::printf("max |w2|  discrepancy: %.3e\n", rep.max_w2);
    std::printf("max |w12| discrepancy: %.3e\n", rep.max_w12);
    std::printf("max |z12| discrepancy: %.3e\n", rep.max_z12);
    std::printf("%s (tolerance %.1e), report: %s\n", rep.pass ? "pass" : "FAIL", rep.tolerance,
                path.string().c_str());
    return rep.pass ? 0 : 1;
}

int cmd_report(const std::string& target) {
    fs::path path(target);
    if (fs::is_directory(path)) path /= "report.json";
    std::ifstream f(path);
    if (!f) throw std::runtime_error("report: cannot open " + path.string());
    nlohmann::json j;
    f >> j;
    std::printf("scenario : %s\n", j.value("scenario", "?").c_str());
    std::printf("hash     : %s\n", j.value("scenario_hash", "?").c_str());
    std::printf("version  : %s\n", j.value("version", "?").c_str());
    std::printf("wall     : %.1f ms\n", j.value("wall_ms", 0.0));
    for (const auto& c : j.value("checks", nlohmann::json::array())) {
        std::string line = "  [" + c.value("status", "?") + "] " + c.value("check", "?");
        if (c.contains("fitted_rate"))
            line += "  rate " + std::to_string(c["fitted_rate"].get<double>()) + " / target " +
                    std::to_string(c.value("target_rate", 0.0));
        if (c.contains("max_error"))
            line += "  max_error " + std::to_string(c["max_error"].get<double>());
        if (c.contains("max_drift"))
            line += "  max_drift " + std::to_string(c["max_drift"].get<double>());
        std::puts(line.c_str());
    }
    const bool ok = j.value("overall_pass", false);
    std::printf("overall  : %s\n", ok ? "pass" : "FAIL");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Schrodinger-Lohe / Wigner-Lohe / quantum-hydrodynamics simulation suite"};
    app.require_subcommand(1);

    RunArgs sl_args, wl_args, ku_args;
    add_run_options(app.add_subcommand("run-sl", "run a Schrodinger-Lohe scenario"), sl_args);
    add_run_options(app.add_subcommand("run-wl", "run a Wigner-Lohe scenario"), wl_args);
    add_run_options(app.add_subcommand("run-kuramoto", "run a Kuramoto scenario"), ku_args);

    std::string tr_in, tr_in2, tr_out = ".";
    auto* tr = app.add_subcommand("transform", "Wigner-transform wave-function snapshots");
    tr->add_option("--in", tr_in, "psi snapshot (binary)")->required()->check(CLI::ExistingFile);
    tr->add_option("--in2", tr_in2, "second psi snapshot for the pair transform")
        ->check(CLI::ExistingFile);
    tr->add_option("--out", tr_out, "output directory");

    std::string hy_run, hy_out;
    double hy_eps = tol::vacuum_eps;
    auto* hy = app.add_subcommand("hydro", "hydrodynamic fields + residuals from a stored run");
    hy->add_option("--run", hy_run, "run directory")->required()->check(CLI::ExistingDirectory);
    hy->add_option("--out", hy_out, "output directory (default: the run directory)");
    hy->add_option("--eps", hy_eps, "vacuum threshold on |psi|");

    std::string cp_config, cp_out = ".";
    double cp_tol = tol::pipeline_discrepancy;
    auto* cp = app.add_subcommand("compare", "S-L vs Wigner-Lohe pipeline cross-check");
    cp->add_option("--config", cp_config, "scenario config")->required()->check(CLI::ExistingFile);
    cp->add_option("--out", cp_out, "output directory");
    cp->add_option("--tolerance", cp_tol, "discrepancy tolerance");

    std::string rp_target;
    auto* rp = app.add_subcommand("report", "human-readable summary of a run manifest");
    rp->add_option("target", rp_target, "run directory or report.json")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run-sl")) return run_many(sl_args, "sl");
        if (app.got_subcommand("run-wl")) return run_many(wl_args, "wl");
        if (app.got_subcommand("run-kuramoto")) return run_many(ku_args, "kuramoto");
        if (app.got_subcommand("transform")) return cmd_transform(tr_in, tr_in2, tr_out);
        if (app.got_subcommand("hydro")) return cmd_hydro(hy_run, hy_out, hy_eps);
        if (app.got_subcommand("compare")) return cmd_compare(cp_config, cp_out, cp_tol);
        if (app.got_subcommand("report")) return cmd_report(rp_target);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
