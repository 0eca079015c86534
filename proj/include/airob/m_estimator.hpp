#pragma once

#include <span>
#include <vector>

#include "airob/psi.hpp"

namespace airob {

struct MEstimate {
    double value = 0.0;      ///< root of the estimating equation
    double residual = 0.0;   ///< sum of psi at the root
    int iterations = 0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
};

/// Per-sample derivatives c_n of the estimate with respect to each data
/// point, with the shared denominator sum_m d(psi)/d(theta).
struct Sensitivity {
    std::vector<double> c;
    double denom = 0.0;
};

struct SolveOptions {
    int scan_points = 512;      ///< sign-change scan resolution over the bracket
    int max_doublings = 64;     ///< geometric bracket expansion budget
    double width_tol = 1e-12;   ///< bisection interval width target
    double residual_tol = 1e-10;  ///< per-sample residual bound (scaled by N)
};

/// Solve sum_n psi(x_n, theta) = 0 by bracketed bisection with secant
/// polishing. Raises no_root if no sign change is found after expanding the
/// initial bracket, and ambiguous_root (listing all bracketed roots) when
/// the scan grid detects several sign changes.
MEstimate solve(const PsiSpec& psi, std::span<const double> data, const SolveOptions& opts = {});

/// c_n = -psi_dx(x_n, T) / sum_m psi_dtheta(x_m, T). Raises
/// degenerate_estimator when the denominator vanishes and
/// breakpoint_ambiguity when a sample sits on a psi' breakpoint.
Sensitivity sensitivity(const PsiSpec& psi, std::span<const double> data, const MEstimate& est);

}  // namespace airob
