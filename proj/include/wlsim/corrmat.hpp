#pragma once

#include <vector>

#include "wlsim/ensemble.hpp"

namespace wlsim {

// z_jk = <psi_j, psi_k> = r_jk + i s_jk. Hermitian with unit diagonal on the
// unit sphere; |z_jk| <= 1 by Cauchy-Schwarz. Stored dense (N is small).
struct CorrelationMatrix {
    std::size_t n = 0;
    std::vector<cx> z;  // row-major n x n

    CorrelationMatrix() = default;
    explicit CorrelationMatrix(std::size_t N) : n(N), z(N * N, cx(0.0, 0.0)) {}

    cx& at(std::size_t j, std::size_t k) { return z[j * n + k]; }
    const cx& at(std::size_t j, std::size_t k) const { return z[j * n + k]; }

    double max_hermitian_defect() const {
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                m = std::max(m, std::abs(at(j, k) - std::conj(at(k, j))));
        return m;
    }

    double max_diag_defect() const {
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j) m = std::max(m, std::abs(at(j, j) - cx(1.0, 0.0)));
        return m;
    }

    double max_modulus() const {
        double m = 0.0;
        for (const cx& v : z) m = std::max(m, std::abs(v));
        return m;
    }
};

inline CorrelationMatrix correlations(const EnsembleState& s) {
    const std::size_t N = s.size();
    CorrelationMatrix c(N);
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t k = 0; k < N; ++k) {
            // Each ordered pair is computed directly; z_kj = conj(z_jk) then
            // holds bitwise because the summands are exact conjugates.
            c.at(j, k) = inner_product(s.psi[j], s.psi[k]);
        }
    }
    return c;
}

}  // namespace wlsim
