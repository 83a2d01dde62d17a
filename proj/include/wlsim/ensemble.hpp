#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wlsim/field.hpp"
#include "wlsim/potential.hpp"

namespace wlsim {

// The N-tuple Psi together with time, coupling and the shared potential.
// Initial norms must already sit on the unit sphere; data is validated, never
// silently renormalized. `omega_offsets` are optional per-oscillator constant
// additions to V (V_i = V + Omega_i), needed only by the space-homogeneous
// Kuramoto reduction; every theorem checker that assumes identical potentials
// gates on them being uniform.
struct EnsembleState {
    double t = 0.0;
    std::vector<ComplexField> psi;
    double K = 0.0;
    Potential V;
    std::vector<double> omega_offsets;  // empty means all zero

    EnsembleState() = default;

    EnsembleState(std::vector<ComplexField> fields, double coupling, Potential pot,
                  std::vector<double> offsets = {}, double time = 0.0,
                  double norm_tol = 1e-8)
        : t(time), psi(std::move(fields)), K(coupling), V(std::move(pot)),
          omega_offsets(std::move(offsets)) {
        validate(norm_tol);
    }

    std::size_t size() const { return psi.size(); }

    const SpatialGrid& grid() const { return psi.at(0).grid; }

    double offset(std::size_t j) const {
        return omega_offsets.empty() ? 0.0 : omega_offsets.at(j);
    }

    bool identical_potentials() const {
        if (omega_offsets.empty()) return true;
        for (double w : omega_offsets)
            if (w != omega_offsets.front()) return false;
        return true;
    }

    void validate(double norm_tol = 1e-8) const {
        if (psi.size() < 2)
            throw std::invalid_argument("EnsembleState: at least two oscillators required");
        if (K < 0.0) throw std::invalid_argument("EnsembleState: coupling must be nonnegative");
        if (!omega_offsets.empty() && omega_offsets.size() != psi.size())
            throw std::invalid_argument("EnsembleState: omega_offsets size mismatch");
        for (std::size_t j = 0; j < psi.size(); ++j) {
            if (psi[j].grid != psi[0].grid)
                throw GridMismatchError("EnsembleState: oscillators on different grids");
            if (!psi[j].finite())
                throw std::invalid_argument("EnsembleState: non-finite amplitude in psi_" +
                                            std::to_string(j + 1));
            const double nrm = l2_norm(psi[j]);
            if (std::abs(nrm - 1.0) > norm_tol)
                throw std::invalid_argument("EnsembleState: ||psi_" + std::to_string(j + 1) +
                                            "|| = " + std::to_string(nrm) +
                                            " is not 1 within tolerance");
        }
    }
};

}  // namespace wlsim
