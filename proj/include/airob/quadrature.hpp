#pragma once

#include <functional>
#include <vector>

namespace airob {

struct QuadratureOptions {
    double abs_tol = 1e-9;
    int max_panels = 20000;
    /// Interior points where the integrand (or its derivative) jumps.
    /// The integrator seeds one panel boundary at each of them.
    std::vector<double> breakpoints{};
};

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int panels = 0;
};

using RealFn = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (G7,K15) integration of f over [lo, hi].
///
/// Infinite endpoints are allowed; they are mapped onto finite intervals by
/// the monotone rational substitutions x = a + t/(1-t) (half-infinite) and
/// x = t/(1-t^2) (doubly infinite). Throws quadrature_error when the error
/// estimate cannot be pushed below abs_tol within max_panels subdivisions.
QuadratureResult integrate(const RealFn& f, double lo, double hi,
                           const QuadratureOptions& opts = {});

/// Convenience wrapper returning just the value.
double integral(const RealFn& f, double lo, double hi, const QuadratureOptions& opts = {});

}  // namespace airob
