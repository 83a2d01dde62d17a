#pragma once

#include <cmath>
#include <vector>

#include "wlsim/common.hpp"
#include "wlsim/util.hpp"

namespace wlsim {

struct RateFit {
    double rate = 0.0;       // negated slope of log y
    double amplitude = 0.0;  // exp(intercept at t = 0)
    double residual = 0.0;   // rms misfit of log y
    std::size_t npoints = 0;
    double t0 = 0.0, t1 = 0.0;
};

// Linear least squares on (t, log y) over [t0, t1]; samples at or below
// `floor` are excluded. Operationalizes every "~ exp(-Kt)" claim.
inline RateFit fit_rate(const std::vector<double>& t, const std::vector<double>& y,
                        double t0, double t1, double floor = tol::series_floor) {
    if (t.size() != y.size()) throw std::invalid_argument("fit_rate: size mismatch");
    std::vector<double> ts, ls;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] > t1) continue;
        if (!(y[i] > floor)) continue;
        ts.push_back(t[i]);
        ls.push_back(std::log(y[i]));
    }
    if (ts.size() < 8)
        throw PreconditionError("fit_rate: fewer than 8 samples above the floor in the window");

    const auto m = static_cast<double>(ts.size());
    double st = 0.0, sl = 0.0;
    for (double v : ts) st += v;
    for (double v : ls) sl += v;
    const double tbar = st / m, lbar = sl / m;
    double stt = 0.0, stl = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        stt += (ts[i] - tbar) * (ts[i] - tbar);
        stl += (ts[i] - tbar) * (ls[i] - lbar);
    }
    RateFit f;
    f.npoints = ts.size();
    f.t0 = ts.front();
    f.t1 = ts.back();
    const double slope = stt > 0.0 ? stl / stt : 0.0;
    f.rate = -slope;
    f.amplitude = std::exp(lbar - slope * tbar);
    double ss = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double fit = lbar + slope * (ts[i] - tbar);
        ss += (ls[i] - fit) * (ls[i] - fit);
    }
    f.residual = std::sqrt(ss / m);
    if (!std::isfinite(f.rate)) throw std::runtime_error("fit_rate: non-finite rate");
    return f;
}

}  // namespace wlsim
