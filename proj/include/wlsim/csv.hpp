#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "wlsim/kuramoto.hpp"
#include "wlsim/sl.hpp"
#include "wlsim/wigner.hpp"

namespace wlsim {

namespace csvio {

// Shortest round-trip decimal formatting; CSV bytes are part of the
// determinism contract.
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace csvio

// Columns: t, norm_1..norm_N, diameter, r_jk..., s_jk... with pair columns in
// lexicographic (j, k) order.
inline std::string sl_observables_csv(const SLTrajectory& traj) {
    const std::size_t N = traj.n_osc;
    std::string out = "t";
    for (std::size_t j = 0; j < N; ++j) out += ",norm_" + std::to_string(j + 1);
    out += ",diameter";
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = j + 1; k < N; ++k)
            out += ",r_" + std::to_string(j + 1) + std::to_string(k + 1);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = j + 1; k < N; ++k)
            out += ",s_" + std::to_string(j + 1) + std::to_string(k + 1);
    out += "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += csvio::num(traj.times[i]);
        for (std::size_t j = 0; j < N; ++j) out += "," + csvio::num(traj.norms[i][j]);
        out += "," + csvio::num(traj.diam[i]);
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = j + 1; k < N; ++k)
                out += "," + csvio::num(traj.corr[i].at(j, k).real());
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = j + 1; k < N; ++k)
                out += "," + csvio::num(traj.corr[i].at(j, k).imag());
        out += "\n";
    }
    return out;
}

// Columns: t, mass_j..., re_z_jk..., im_z_jk..., w_dist2.
inline std::string wl_observables_csv(const WLTrajectory& traj) {
    const std::size_t N = traj.n_osc;
    std::string out = "t";
    for (std::size_t j = 0; j < N; ++j) out += ",mass_" + std::to_string(j + 1);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = j + 1; k < N; ++k)
            out += ",re_z_" + std::to_string(j + 1) + std::to_string(k + 1);
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = j + 1; k < N; ++k)
            out += ",im_z_" + std::to_string(j + 1) + std::to_string(k + 1);
    out += ",w_dist2\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += csvio::num(traj.times[i]);
        for (std::size_t j = 0; j < N; ++j) out += "," + csvio::num(traj.masses[i][j]);
        for (const cx& z : traj.z_upper[i]) out += "," + csvio::num(z.real());
        for (const cx& z : traj.z_upper[i]) out += "," + csvio::num(z.imag());
        out += "," + csvio::num(traj.dist2[i]);
        out += "\n";
    }
    return out;
}

// Columns: t, theta_1..theta_N (unwrapped phases).
inline std::string kuramoto_csv(const KuramotoTrajectory& traj) {
    const std::size_t N = traj.omega.size();
    std::string out = "t";
    for (std::size_t j = 0; j < N; ++j) out += ",theta_" + std::to_string(j + 1);
    out += "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += csvio::num(traj.times[i]);
        for (std::size_t j = 0; j < N; ++j) out += "," + csvio::num(traj.theta[i][j]);
        out += "\n";
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw std::runtime_error("short write to " + path.string());
}

}  // namespace wlsim
