#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wlsim/field.hpp"
#include "wlsim/grid.hpp"

namespace wlsim {

// One-body potential, identical across oscillators (per-oscillator constant
// offsets live on EnsembleState for the space-homogeneous reduction).
// The harmonic kind is the periodized quadratic: smooth around its center,
// with the fold at the antipodal point of the box. Scenarios keep wave
// support away from the fold.
struct Potential {
    enum class Kind { Zero, Constant, Harmonic, Tabulated };

    Kind kind = Kind::Zero;
    double value = 0.0;                    // Constant
    double omega = 0.0;                    // Harmonic
    std::array<double, 2> center{0.0, 0.0};
    std::vector<double> table;             // Tabulated, row-major on the target grid

    static Potential zero() { return {}; }

    static Potential constant(double v) {
        Potential p;
        p.kind = Kind::Constant;
        p.value = v;
        return p;
    }

    static Potential harmonic(double omega, double c0, double c1 = 0.0) {
        Potential p;
        p.kind = Kind::Harmonic;
        p.omega = omega;
        p.center = {c0, c1};
        return p;
    }

    static Potential tabulated(std::vector<double> samples) {
        Potential p;
        p.kind = Kind::Tabulated;
        p.table = std::move(samples);
        for (double x : p.table)
            if (!std::isfinite(x)) throw std::invalid_argument("Potential: non-finite sample");
        return p;
    }

    std::vector<double> sample(const SpatialGrid& g) const {
        std::vector<double> out(g.points(), 0.0);
        switch (kind) {
            case Kind::Zero:
                break;
            case Kind::Constant:
                for (double& x : out) x = value;
                break;
            case Kind::Harmonic:
                for (std::size_t i0 = 0; i0 < g.n[0]; ++i0) {
                    for (std::size_t i1 = 0; i1 < g.n[1]; ++i1) {
                        double u = g.periodic_delta(0, g.coord(0, i0), center[0]);
                        double r2 = u * u;
                        if (g.dim == 2) {
                            u = g.periodic_delta(1, g.coord(1, i1), center[1]);
                            r2 += u * u;
                        }
                        out[g.index(i0, i1)] = 0.5 * omega * omega * r2;
                    }
                }
                break;
            case Kind::Tabulated:
                if (table.size() != g.points())
                    throw std::invalid_argument("Potential: table size does not match grid");
                out = table;
                break;
        }
        for (double x : out)
            if (!std::isfinite(x)) throw std::invalid_argument("Potential: non-finite sample");
        return out;
    }

    // grad V along axis d. Analytic for the closed-form kinds; spectral for
    // tabulated data.
    std::vector<double> gradient(const SpatialGrid& g, int d) const {
        std::vector<double> out(g.points(), 0.0);
        switch (kind) {
            case Kind::Zero:
            case Kind::Constant:
                break;
            case Kind::Harmonic:
                for (std::size_t i0 = 0; i0 < g.n[0]; ++i0)
                    for (std::size_t i1 = 0; i1 < g.n[1]; ++i1) {
                        const double xd = d == 0 ? g.coord(0, i0) : g.coord(1, i1);
                        out[g.index(i0, i1)] =
                            omega * omega * g.periodic_delta(d, xd, center[d]);
                    }
                break;
            case Kind::Tabulated: {
                ComplexField f(g);
                const std::vector<double> s = sample(g);
                for (std::size_t i = 0; i < s.size(); ++i) f.v[i] = s[i];
                const ComplexField df = spectral_gradient(f)[d];
                for (std::size_t i = 0; i < s.size(); ++i) out[i] = df.v[i].real();
                break;
            }
        }
        return out;
    }

    double max_abs(const SpatialGrid& g) const {
        double m = 0.0;
        for (double x : sample(g)) m = std::max(m, std::abs(x));
        return m;
    }

    std::string kind_name() const {
        switch (kind) {
            case Kind::Zero: return "zero";
            case Kind::Constant: return "constant";
            case Kind::Harmonic: return "harmonic";
            case Kind::Tabulated: return "tabulated";
        }
        return "?";
    }
};

}  // namespace wlsim
