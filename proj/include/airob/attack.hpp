#pragma once

#include <functional>
#include <span>
#include <vector>

#include "airob/m_estimator.hpp"
#include "airob/norm.hpp"
#include "airob/report.hpp"

namespace airob {

/// A perturbation of the whole dataset under the budget
/// (1/N) ||delta||_p^p <= eta^p (||delta||_inf <= eta for p = inf).
struct AttackPlan {
    std::vector<double> delta;
    double eta = 0.0;
    NormOrder p = NormOrder::one();
    double predicted_shift = 0.0;  ///< first-order estimate sum c_n delta_n
    double realized_shift = 0.0;   ///< |T(x + delta) - T(x)| after re-solving
    std::size_t argmax_index = 0;  ///< n* for p = 1 (lowest index on ties)
};

/// First-order optimal attack against the M-estimator defined by psi.
/// p = 1 puts the whole budget on the most sensitive sample, finite p
/// waterfills by |c_n|^{1/(p-1)}, p = inf moves every sample by eta.
AttackPlan optimal_attack(const PsiSpec& psi, std::span<const double> data, double eta,
                          NormOrder p, const SolveOptions& opts = {});

/// Closed-form empirical AIF of the estimator at this dataset.
AifReport aif_empirical(const PsiSpec& psi, std::span<const double> data, NormOrder p,
                        const SolveOptions& opts = {});

/// Finite-budget probe of the AIF definition: realized shift over eta for
/// each grid value, extrapolated to eta -> 0 by a least-squares fit of
/// shift/eta = aif + k eta.
AifReport aif_finite_eta(const PsiSpec& psi, std::span<const double> data, NormOrder p,
                         std::span<const double> eta_grid, const SolveOptions& opts = {});

/// Result of the exhaustive grid oracle.
struct BruteForceResult {
    std::vector<double> delta;
    double shift = 0.0;
};

/// Exhaustive search over the feasible perturbation grid for any estimator
/// functional; shared by the M-estimator oracle below and the L-estimator
/// tests. Grid cells are evaluated in parallel.
BruteForceResult brute_force_max_shift(
    const std::function<double(std::span<const double>)>& estimator, std::span<const double> data,
    double eta, NormOrder p, int grid_per_dim);

/// Test oracle: exhaustive attack against the M-estimator. Restricted to
/// N <= 4 to keep the grid bounded.
AttackPlan brute_force_attack(const PsiSpec& psi, std::span<const double> data, double eta,
                              NormOrder p, int grid_per_dim);

}  // namespace airob
