#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace wlsim {

using cx = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Thrown when two fields that must share a discretization do not.
struct GridMismatchError : std::invalid_argument {
    explicit GridMismatchError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a scenario/config file is missing or malforms a key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a time integrator detects it has left its validity regime
// (norm or mass drift past the documented per-step budget).
struct IntegrationFailure : std::runtime_error {
    explicit IntegrationFailure(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an operation's mathematical precondition is not met
// (excluded initial datum, non-homogeneous field passed to a reduction, ...).
struct PreconditionError : std::invalid_argument {
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

inline constexpr const char* kVersion = "wlsim 0.1.0";

// Central tolerance table. Every check ships with its default pinned here;
// the README documents which verification each value serves.
namespace tol {
inline constexpr double norm_drift          = 1e-7;   // max_t | ||psi_i|| - 1 |
inline constexpr double step_norm_drift     = 1e-6;   // single-step integrator guard
inline constexpr double mass_drift          = 1e-4;   // Wigner-Lohe mass guard
inline constexpr double corr_closed_form    = 1e-6;   // |z12_pde - z12_closed|
inline constexpr double bound_slack         = 1e-6;   // multiplicative slack on envelopes
inline constexpr double rate_window_frac    = 0.10;   // fitted rate within 10% of target
inline constexpr double h1_rate_frac        = 0.15;   // H1-sync rate slack (rate >= 0.85 K)
inline constexpr double h1_floor_frac       = 1e-6;   // "reached the floor" alternative
inline constexpr double continuity_residual = 1e-4;
inline constexpr double momentum_residual   = 1e-2;
inline constexpr double pipeline_discrepancy= 1e-4;
inline constexpr double series_floor        = 1e-13;  // rate fits ignore samples below this
inline constexpr double kuramoto_match      = 1e-6;
inline constexpr double vacuum_eps          = 1e-8;   // |psi| cutoff for the polar factor
inline constexpr double vacuum_mask_rho     = 1e-6;   // momentum residuals evaluated on rho >= this
inline constexpr double log_fit_residual    = 0.1;    // rms log-misfit accepted by decay checks
}  // namespace tol

}  // namespace wlsim
