#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wlsim/ensemble.hpp"
#include "wlsim/initcond.hpp"
#include "wlsim/kuramoto.hpp"
#include "wlsim/util.hpp"

namespace wlsim {

// Flat INI-style configuration: [section] headers, key = value lines,
// comments with '#' or ';', arrays as bracketed lists.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static IniFile parse(const std::string& text) {
        IniFile ini;
        std::string section;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("config line " + std::to_string(lineno) +
                                      ": unterminated section header");
                section = trim(line.substr(1, line.size() - 2));
                ini.sections[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
            ini.sections[section][key] = val;
        }
        return ini;
    }

    bool has(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        return s != sections.end() && s->second.count(key) > 0;
    }

    std::string get(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        if (s == sections.end() || !s->second.count(key))
            throw ConfigError("config: missing key " + sec + "." + key);
        return s->second.at(key);
    }

    std::string get_or(const std::string& sec, const std::string& key,
                       const std::string& fallback) const {
        return has(sec, key) ? get(sec, key) : fallback;
    }
};

namespace cfg {

inline double to_double(const std::string& sec, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: key " + sec + "." + key + " is not a number: '" + v + "'");
    }
}

inline std::uint64_t to_u64(const std::string& sec, const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const unsigned long long u = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("trailing characters");
        return u;
    } catch (const std::exception&) {
        throw ConfigError("config: key " + sec + "." + key + " is not an unsigned integer: '" + v +
                          "'");
    }
}

inline bool to_bool(const std::string& sec, const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key " + sec + "." + key + " is not a boolean: '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& sec, const std::string& key,
                                           const std::string& v) {
    std::string s = IniFile::trim(v);
    if (s.size() < 2 || s.front() != '[' || s.back() != ']')
        throw ConfigError("config: key " + sec + "." + key + " must be a bracketed list");
    s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(IniFile::trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    const std::string last = IniFile::trim(cur);
    if (!last.empty()) out.push_back(last);
    for (const std::string& e : out)
        if (e.empty()) throw ConfigError("config: key " + sec + "." + key + " has an empty element");
    return out;
}

inline std::vector<double> to_doubles(const std::string& sec, const std::string& key,
                                      const std::string& v) {
    std::vector<double> out;
    for (const std::string& e : split_list(sec, key, v)) out.push_back(to_double(sec, key, e));
    return out;
}

}  // namespace cfg

struct Scenario {
    std::string name = "scenario";
    std::string model;  // sl | wl | kuramoto
    std::uint64_t seed = 0;
    bool has_seed = false;

    // grid
    std::size_t n = 256;
    double length = 16.0;

    // ensemble
    std::size_t n_osc = 2;
    double coupling = 0.0;
    std::vector<double> omega_offsets;

    // potential
    Potential potential;

    // initial condition
    std::string preset;
    std::vector<double> centers, widths, phases, boosts;  // gaussian_offsets
    std::vector<double> thetas;                           // homogeneous
    double smoothness = 1.0;                              // random
    std::vector<cx> gram;                                 // gram / pair overlap
    double ic_center = -1.0, ic_width = 1.0, ic_boost = 0.0;

    // kuramoto
    std::vector<double> k_omega, k_theta0;

    // time stepping
    double t_final = 1.0;
    double dt = 1e-3;
    std::size_t obs_every = 1;
    std::size_t snapshot_every = 0;
    bool renormalize = false;

    // verification
    std::vector<std::string> checks;
    std::map<std::string, double> check_params;
    double eps = tol::vacuum_eps;

    double check_param(const std::string& key, double fallback) const {
        auto it = check_params.find(key);
        return it == check_params.end() ? fallback : it->second;
    }
};

inline Scenario scenario_from_ini(const IniFile& ini) {
    Scenario s;
    s.name = ini.get_or("scenario", "name", "scenario");
    s.model = ini.get("scenario", "model");
    if (s.model != "sl" && s.model != "wl" && s.model != "kuramoto")
        throw ConfigError("config: scenario.model must be one of sl, wl, kuramoto");
    if (ini.has("scenario", "seed")) {
        s.seed = cfg::to_u64("scenario", "seed", ini.get("scenario", "seed"));
        s.has_seed = true;
    }

    if (s.model != "kuramoto") {
        s.n = cfg::to_u64("grid", "n", ini.get("grid", "n"));
        s.length = cfg::to_double("grid", "length", ini.get("grid", "length"));
        s.n_osc = cfg::to_u64("ensemble", "n_osc", ini.get("ensemble", "n_osc"));
        s.coupling = cfg::to_double("ensemble", "coupling", ini.get("ensemble", "coupling"));
        if (ini.has("ensemble", "omega_offsets"))
            s.omega_offsets =
                cfg::to_doubles("ensemble", "omega_offsets", ini.get("ensemble", "omega_offsets"));

        const std::string kind = ini.get_or("potential", "kind", "zero");
        const double center = ini.has("potential", "center")
                                  ? cfg::to_double("potential", "center",
                                                   ini.get("potential", "center"))
                                  : 0.5 * s.length;
        if (kind == "zero") {
            s.potential = Potential::zero();
        } else if (kind == "constant") {
            s.potential =
                Potential::constant(cfg::to_double("potential", "value", ini.get("potential", "value")));
        } else if (kind == "harmonic") {
            s.potential = Potential::harmonic(
                cfg::to_double("potential", "omega", ini.get("potential", "omega")), center, center);
        } else if (kind == "tabulated") {
            s.potential = Potential::tabulated(
                cfg::to_doubles("potential", "values", ini.get("potential", "values")));
        } else {
            throw ConfigError("config: potential.kind '" + kind + "' is not recognized");
        }

        s.preset = ini.get("initial", "preset");
        if (s.preset == "gaussian_offsets") {
            s.centers = cfg::to_doubles("initial", "centers", ini.get("initial", "centers"));
            s.widths = cfg::to_doubles("initial", "widths", ini.get("initial", "widths"));
            s.phases = cfg::to_doubles("initial", "phases", ini.get("initial", "phases"));
            if (ini.has("initial", "boosts"))
                s.boosts = cfg::to_doubles("initial", "boosts", ini.get("initial", "boosts"));
        } else if (s.preset == "homogeneous") {
            s.thetas = cfg::to_doubles("initial", "thetas", ini.get("initial", "thetas"));
        } else if (s.preset == "random") {
            if (!s.has_seed)
                throw ConfigError("config: scenario.seed is mandatory for the random preset");
            if (ini.has("initial", "smoothness"))
                s.smoothness =
                    cfg::to_double("initial", "smoothness", ini.get("initial", "smoothness"));
        } else if (s.preset == "gram") {
            if (ini.has("initial", "z12")) {
                const std::vector<double> z =
                    cfg::to_doubles("initial", "z12", ini.get("initial", "z12"));
                if (z.size() != 2) throw ConfigError("config: initial.z12 must be [re, im]");
                if (s.n_osc != 2)
                    throw ConfigError("config: initial.z12 requires ensemble.n_osc = 2");
                s.gram = {cx(1.0, 0.0), cx(z[0], z[1]), cx(z[0], -z[1]), cx(1.0, 0.0)};
            } else {
                const std::vector<double> re =
                    cfg::to_doubles("initial", "gram_re", ini.get("initial", "gram_re"));
                const std::vector<double> im =
                    cfg::to_doubles("initial", "gram_im", ini.get("initial", "gram_im"));
                if (re.size() != s.n_osc * s.n_osc || im.size() != re.size())
                    throw ConfigError("config: initial.gram_re/gram_im must be N*N row-major");
                for (std::size_t i = 0; i < re.size(); ++i) s.gram.emplace_back(re[i], im[i]);
            }
        } else {
            throw ConfigError("config: initial.preset '" + s.preset + "' is not recognized");
        }
        if (ini.has("initial", "center"))
            s.ic_center = cfg::to_double("initial", "center", ini.get("initial", "center"));
        if (ini.has("initial", "width"))
            s.ic_width = cfg::to_double("initial", "width", ini.get("initial", "width"));
        if (ini.has("initial", "boost"))
            s.ic_boost = cfg::to_double("initial", "boost", ini.get("initial", "boost"));
    } else {
        s.k_omega = cfg::to_doubles("kuramoto", "omega", ini.get("kuramoto", "omega"));
        s.k_theta0 = cfg::to_doubles("kuramoto", "theta0", ini.get("kuramoto", "theta0"));
        if (s.k_omega.size() != s.k_theta0.size())
            throw ConfigError("config: kuramoto.omega and kuramoto.theta0 differ in length");
        s.n_osc = s.k_omega.size();
        if (ini.has("ensemble", "coupling"))
            s.coupling = cfg::to_double("ensemble", "coupling", ini.get("ensemble", "coupling"));
        else
            s.coupling = cfg::to_double("kuramoto", "coupling", ini.get("kuramoto", "coupling"));
    }

    s.t_final = cfg::to_double("time", "t_final", ini.get("time", "t_final"));
    s.dt = cfg::to_double("time", "dt", ini.get("time", "dt"));
    if (ini.has("time", "obs_every"))
        s.obs_every = cfg::to_u64("time", "obs_every", ini.get("time", "obs_every"));
    if (ini.has("time", "snapshot_every"))
        s.snapshot_every = cfg::to_u64("time", "snapshot_every", ini.get("time", "snapshot_every"));
    if (ini.has("time", "renormalize"))
        s.renormalize = cfg::to_bool("time", "renormalize", ini.get("time", "renormalize"));

    if (ini.has("checks", "run"))
        s.checks = cfg::split_list("checks", "run", ini.get("checks", "run"));
    if (ini.sections.count("checks")) {
        for (const auto& [key, val] : ini.sections.at("checks")) {
            if (key == "run") continue;
            s.check_params[key] = cfg::to_double("checks", key, val);
        }
    }
    if (ini.has("hydro", "eps")) s.eps = cfg::to_double("hydro", "eps", ini.get("hydro", "eps"));
    return s;
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return scenario_from_ini(IniFile::parse(text));
}

// Canonical INI rendering of a resolved scenario: sorted keys, full-precision
// numbers. The FNV hash of this text names the run directory; parsing it back
// reproduces the scenario, which is what lets post-processing tools rebuild a
// run from its config.snapshot.
inline std::string canonical_text(const Scenario& s) {
    std::map<std::string, std::map<std::string, std::string>> out;
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    auto arr = [&](const std::vector<double>& v) {
        std::string t = "[";
        for (std::size_t i = 0; i < v.size(); ++i) t += (i ? ", " : "") + num(v[i]);
        return t + "]";
    };

    out["scenario"]["name"] = s.name;
    out["scenario"]["model"] = s.model;
    if (s.has_seed) out["scenario"]["seed"] = std::to_string(s.seed);
    if (s.model != "kuramoto") {
        out["grid"]["n"] = std::to_string(s.n);
        out["grid"]["length"] = num(s.length);
        out["ensemble"]["n_osc"] = std::to_string(s.n_osc);
        out["ensemble"]["coupling"] = num(s.coupling);
        if (!s.omega_offsets.empty()) out["ensemble"]["omega_offsets"] = arr(s.omega_offsets);
        out["potential"]["kind"] = s.potential.kind_name();
        switch (s.potential.kind) {
            case Potential::Kind::Zero:
                break;
            case Potential::Kind::Constant:
                out["potential"]["value"] = num(s.potential.value);
                break;
            case Potential::Kind::Harmonic:
                out["potential"]["omega"] = num(s.potential.omega);
                out["potential"]["center"] = num(s.potential.center[0]);
                break;
            case Potential::Kind::Tabulated:
                out["potential"]["values"] = arr(s.potential.table);
                break;
        }
        out["initial"]["preset"] = s.preset;
        if (!s.centers.empty()) out["initial"]["centers"] = arr(s.centers);
        if (!s.widths.empty()) out["initial"]["widths"] = arr(s.widths);
        if (!s.phases.empty()) out["initial"]["phases"] = arr(s.phases);
        if (!s.boosts.empty()) out["initial"]["boosts"] = arr(s.boosts);
        if (!s.thetas.empty()) out["initial"]["thetas"] = arr(s.thetas);
        if (!s.gram.empty()) {
            std::vector<double> re, im;
            for (const cx& z : s.gram) {
                re.push_back(z.real());
                im.push_back(z.imag());
            }
            out["initial"]["gram_re"] = arr(re);
            out["initial"]["gram_im"] = arr(im);
        }
        if (s.preset == "gram") {
            out["initial"]["center"] = num(s.ic_center >= 0.0 ? s.ic_center : 0.5 * s.length);
            out["initial"]["width"] = num(s.ic_width);
            out["initial"]["boost"] = num(s.ic_boost);
        }
        if (s.preset == "random") out["initial"]["smoothness"] = num(s.smoothness);
    } else {
        out["kuramoto"]["coupling"] = num(s.coupling);
        out["kuramoto"]["omega"] = arr(s.k_omega);
        out["kuramoto"]["theta0"] = arr(s.k_theta0);
    }
    out["time"]["t_final"] = num(s.t_final);
    out["time"]["dt"] = num(s.dt);
    out["time"]["obs_every"] = std::to_string(s.obs_every);
    out["time"]["snapshot_every"] = std::to_string(s.snapshot_every);
    out["time"]["renormalize"] = s.renormalize ? "true" : "false";
    if (!s.checks.empty()) {
        std::string t = "[";
        for (std::size_t i = 0; i < s.checks.size(); ++i) t += (i ? ", " : "") + s.checks[i];
        out["checks"]["run"] = t + "]";
    }
    for (const auto& [k, v] : s.check_params) out["checks"][k] = num(v);
    out["hydro"]["eps"] = num(s.eps);

    std::string text;
    for (const auto& [sec, kv] : out) {
        text += "[" + sec + "]\n";
        for (const auto& [k, v] : kv) text += k + " = " + v + "\n";
    }
    return text;
}

inline std::uint64_t scenario_hash(const Scenario& s) { return fnv1a64(canonical_text(s)); }

inline SpatialGrid make_grid(const Scenario& s) { return SpatialGrid(s.n, s.length); }

inline std::vector<ComplexField> make_initial_fields(const Scenario& s, const SpatialGrid& g) {
    const double center = s.ic_center >= 0.0 ? s.ic_center : 0.5 * s.length;
    if (s.preset == "gaussian_offsets")
        return gaussian_offsets(g, s.centers, s.widths, s.phases, s.boosts);
    if (s.preset == "homogeneous") return homogeneous(g, s.thetas);
    if (s.preset == "random") return random_tuple(g, s.n_osc, s.seed, s.smoothness);
    if (s.preset == "gram") return gram_tuple(g, s.gram, s.n_osc, center, s.ic_width, s.ic_boost);
    throw ConfigError("config: initial.preset '" + s.preset + "' is not recognized");
}

inline EnsembleState make_sl_state(const Scenario& s) {
    const SpatialGrid g = make_grid(s);
    std::vector<ComplexField> psi = make_initial_fields(s, g);
    if (psi.size() != s.n_osc)
        throw ConfigError("config: initial condition produced " + std::to_string(psi.size()) +
                          " fields, ensemble.n_osc = " + std::to_string(s.n_osc));
    return EnsembleState(std::move(psi), s.coupling, s.potential, s.omega_offsets);
}

inline KuramotoState make_kuramoto_state(const Scenario& s) {
    KuramotoState k;
    k.theta = s.k_theta0;
    k.omega = s.k_omega;
    k.K = s.coupling;
    k.validate();
    return k;
}

}  // namespace wlsim
