#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "airob/distributions.hpp"
#include "airob/norm.hpp"
#include "airob/psi.hpp"
#include "airob/report.hpp"

namespace airob {

/// A psi paired with the distribution it targets and the true parameter
/// (0 for location models, 1 for scale models). Construction evaluates the
/// Fisher-consistency residual E[psi(X, theta)]; a nonzero residual is kept
/// as a diagnostic rather than treated as an error, since intentionally
/// miscentered psi are legitimate analysis inputs.
struct PopulationContext {
    DistributionModel model;
    PsiSpec psi;
    double theta = 0.0;
    double fisher_residual = 0.0;

    static PopulationContext location(DistributionModel f0, PsiSpec psi);
    static PopulationContext scale(DistributionModel f1, PsiSpec psi);
    static PopulationContext general(DistributionModel model, PsiSpec psi, double theta);
};

/// Population AIF by quadrature. For p = 1 the numerator is the supremum of
/// |d psi/dx| over the support; when that supremum grows without bound the
/// report carries value = +inf and diagnostics["unbounded"] = 1.
AifReport aif_population(const PopulationContext& ctx, NormOrder p, double quad_tol = 1e-9);

/// Classical influence function at x.
double influence_function(const PopulationContext& ctx, double x);

/// sup_x |IF(x)|; +inf when psi is unbounded over the support.
double gross_error_sensitivity(const PopulationContext& ctx);

struct ConvergenceRow {
    std::size_t n = 0;
    double empirical_aif = 0.0;
    double population_aif = 0.0;
    double rel_error = 0.0;
};

/// Empirical AIF on samples of increasing size against the population value.
/// Rows are computed in parallel with independent streams seeded seed + row.
std::vector<ConvergenceRow> aif_convergence_study(const PopulationContext& ctx, NormOrder p,
                                                  std::span<const std::size_t> n_grid,
                                                  std::uint64_t seed);

/// Supremum of |f| over the model's support: quantile-spaced grid plus
/// golden-section refinement, with a tail ladder that detects growth toward
/// an infinite support end.
struct SupResult {
    double value = 0.0;
    double arg = 0.0;
    bool unbounded = false;
};
SupResult sup_abs_over_support(const RealFn& f, const DistributionModel& model,
                               const std::vector<double>& breakpoints = {});

}  // namespace airob
