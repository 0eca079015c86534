#pragma once

#include <functional>
#include <string>
#include <vector>

namespace airob {

enum class PsiKind { location, scale, general };

/// Defining function of an M-estimator together with its partials.
///
/// psi, psi_dx and psi_dtheta are functions of (x, theta). For
/// kind == location the function depends on x only through x - theta; for
/// kind == scale only through x / theta. `breakpoints` lists the points, in
/// the canonical argument (x - theta, x / theta, or plain x), where the
/// x-derivative jumps.
struct PsiSpec {
    PsiKind kind = PsiKind::general;
    std::function<double(double, double)> psi;
    std::function<double(double, double)> psi_dx;
    std::function<double(double, double)> psi_dtheta;
    std::vector<double> breakpoints{};
    std::string label;

    /// x - theta, x / theta, or x according to kind.
    double canonical_arg(double x, double theta) const {
        switch (kind) {
            case PsiKind::location: return x - theta;
            case PsiKind::scale: return x / theta;
            default: return x;
        }
    }
};

/// Build a location PsiSpec from the one-argument core f(u) = psi(x - theta)
/// and its derivative.
PsiSpec location_psi(std::string label, std::function<double(double)> core,
                     std::function<double(double)> core_prime, std::vector<double> breakpoints = {});

/// Build a scale PsiSpec from the one-argument core f(u) = psi(x / theta).
PsiSpec scale_psi(std::string label, std::function<double(double)> core,
                  std::function<double(double)> core_prime, std::vector<double> breakpoints = {});

/// psi(u) = u: the sample mean.
PsiSpec mean_psi();

/// psi(u) = min(b, max(u, -b)); requires 0 < b < inf.
PsiSpec huber_psi(double b);

/// psi(u) = u^2 - 1 in u = x / theta; the estimating equation's root is the
/// root-mean-square of the data.
PsiSpec gaussian_scale_mle_psi();

/// Resolve "mean" | "huber" | "gaussian-scale-mle"; b is only read for huber.
PsiSpec builtin_psi(const std::string& name, double b = 0.0);

}  // namespace airob
