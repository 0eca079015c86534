#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "airob/distributions.hpp"
#include "airob/psi.hpp"

namespace airob {

struct KktMultipliers {
    double nu = 0.0;
    double theta1 = 0.0;  ///< multiplier of the right-tail IF constraint
    double theta2 = 0.0;  ///< multiplier of the left-tail IF constraint
};

/// One closed-form segment of a designed psi':
///   g(x) = c0 + cx x + cFf F(x)/f(x) + cCf (1-F(x))/f(x) + cexp e^x
/// on [lo, hi]; zero outside all pieces.
struct PsiPiece {
    double lo = 0.0;
    double hi = 0.0;
    double c0 = 0.0;
    double cx = 0.0;
    double cFf = 0.0;
    double cCf = 0.0;
    double cexp = 0.0;
};

/// A designed estimator: piecewise psi' plus the KKT data that produced it.
/// psi itself is anchored so that E[psi] = 0 under the design distribution
/// (when one is present), which reproduces the psi(-inf) convention of the
/// underlying optimality conditions. Immutable after construction.
class DesignedPsi {
  public:
    PsiKind kind = PsiKind::location;
    std::optional<DistributionModel> model;
    std::vector<PsiPiece> pieces;
    KktMultipliers multipliers;
    std::optional<double> xi;
    std::map<std::string, double> diagnostics;

    /// psi'(x); exactly zero outside the active region.
    double gprime(double x) const;

    /// Anchored psi(x).
    double psi(double x) const;

    /// Limit of psi at the lower end of the support; +-inf when psi' does
    /// not vanish toward an infinite tail (min-AIF designs).
    double psi_neg_inf() const { return psi_neg_inf_; }

    std::vector<Interval> active_region() const;

    /// Adapter for the analysis modules (attack, population).
    PsiSpec to_psi_spec() const;

    /// (x, psi(x)) table for plotting.
    std::vector<std::pair<double, double>> sample_curve(int points = 400) const;

    std::string to_json_string() const;
    static DesignedPsi from_json_string(const std::string& text);
    void save_json(const std::string& path) const;
    static DesignedPsi load_json(const std::string& path);

    /// Computes anchors and caches; must be called after the public fields
    /// are filled in (the factory functions below do this).
    void finalize();

  private:
    double accumulate(double x) const;  ///< integral of psi' from the reference point
    double anchor_x_ = 0.0;
    double anchor_const_ = 0.0;
    double psi_neg_inf_ = 0.0;
    std::vector<double> cum_at_lo_;  ///< accumulate() at each piece lower end
};

/// psi'(x) = 1 for all x: the sample mean, minimizing the location AIF for
/// every distribution and every norm order.
DesignedPsi min_aif_location();

/// psi'(x) = x / E[X^2] over the support of f1 (scale analogue); the
/// achieved AIF at p = 2 is 1/sqrt(E[X^2]), reported in diagnostics.
DesignedPsi min_aif_scale(const DistributionModel& f1);

/// Location design minimizing the p = 2 population AIF subject to the
/// gross-error-sensitivity budget xi. Active-set enumeration over the two
/// tail constraints with safeguarded iteration on the reduced multiplier
/// ratios. Throws infeasible_budget (reporting the smallest feasible xi
/// found by bisection) when no active-set case admits a solution.
DesignedPsi tradeoff_location(const DistributionModel& f0, double xi);

/// Scale analogue of tradeoff_location.
DesignedPsi tradeoff_scale(const DistributionModel& f1, double xi);

/// Closed-form location design for the exponential-rate-1 distribution,
/// valid for xi > 1 (the left-tail multiplier vanishes there). The active
/// region is [0, a) with a the unique positive root of
///   e^{-a} = (xi + 2 - a) / ((xi + 1) a + xi + 2);
/// the root is solved for the gap xi + 2 - a in log space so that extreme
/// xi keep full relative precision.
DesignedPsi exponential_tradeoff(double xi);

struct TradeoffRow {
    double xi = 0.0;
    double aif = 0.0;
    double gamma_star = 0.0;
    bool skipped = false;
    std::string reason;
};

/// AIF (p = 2) and realized gamma* of the tradeoff design across an
/// increasing xi grid; infeasible points are recorded as skipped rows.
std::vector<TradeoffRow> tradeoff_curve(const DistributionModel& f, std::span<const double> xi_grid,
                                        PsiKind kind);

/// Residuals of the optimality conditions; the test suites assert them all.
struct KktResiduals {
    double normalization = 0.0;  ///< |E[psi'] - 1| or |E[X psi'] - 1|
    double c1 = 0.0;             ///< value of the right-tail constraint integral
    double c2 = 0.0;             ///< value of the left-tail constraint integral
    double slack1 = 0.0;         ///< |theta1 (c1 - xi)|
    double slack2 = 0.0;         ///< |theta2 (c2 - xi)|
    double feas1 = 0.0;          ///< max(0, c1 - xi)
    double feas2 = 0.0;          ///< max(0, c2 - xi)
    double fisher = 0.0;         ///< |E[psi]|
    double min_gprime = 0.0;     ///< min of psi' over an active-region probe grid
    double max_outside = 0.0;    ///< max |psi'| sampled outside the active region
};
KktResiduals kkt_residuals(const DesignedPsi& design);

}  // namespace airob
