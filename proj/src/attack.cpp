#include "airob/attack.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "airob/errors.hpp"

namespace airob {

namespace {

std::size_t argmax_abs(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[best])) best = i;
    return best;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

AttackPlan optimal_attack(const PsiSpec& psi, std::span<const double> data, double eta,
                          NormOrder p, const SolveOptions& opts) {
    if (!(eta > 0.0)) fail(errc::invalid_parameter, "optimal_attack: eta must be positive");
    const MEstimate est = solve(psi, data, opts);
    const Sensitivity sens = sensitivity(psi, data, est);
    const std::size_t n = data.size();

    bool any = false;
    for (double c : sens.c) any = any || c != 0.0;
    if (!any)
        fail(errc::null_gradient, "optimal_attack: estimator is locally insensitive (all c_n = 0)");

    AttackPlan plan;
    plan.eta = eta;
    plan.p = p;
    plan.delta.assign(n, 0.0);

    if (p.is_one()) {
        const std::size_t star = argmax_abs(sens.c);
        plan.argmax_index = star;
        plan.delta[star] = sign_of(sens.c[star]) * static_cast<double>(n) * eta;
    } else if (p.is_infinity()) {
        for (std::size_t i = 0; i < n; ++i) plan.delta[i] = eta * sign_of(sens.c[i]);
        plan.argmax_index = argmax_abs(sens.c);
    } else {
        const double q = p.conjugate();
        double denom = 0.0;
        for (double c : sens.c) denom += std::pow(std::abs(c), q);
        const double scale =
            std::pow(static_cast<double>(n), 1.0 / p.value()) * eta / std::pow(denom, 1.0 / p.value());
        for (std::size_t i = 0; i < n; ++i)
            plan.delta[i] =
                sign_of(sens.c[i]) * std::pow(std::abs(sens.c[i]), 1.0 / (p.value() - 1.0)) * scale;
        plan.argmax_index = argmax_abs(sens.c);
    }

    for (std::size_t i = 0; i < n; ++i) plan.predicted_shift += sens.c[i] * plan.delta[i];

    std::vector<double> moved(data.begin(), data.end());
    for (std::size_t i = 0; i < n; ++i) moved[i] += plan.delta[i];
    plan.realized_shift = std::abs(solve(psi, moved, opts).value - est.value);
    return plan;
}

AifReport aif_empirical(const PsiSpec& psi, std::span<const double> data, NormOrder p,
                        const SolveOptions& opts) {
    const MEstimate est = solve(psi, data, opts);
    (void)sensitivity(psi, data, est);  // surfaces breakpoint and degeneracy errors
    const std::size_t n = data.size();

    std::vector<double> dx(n), dtheta(n);
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] = psi.psi_dx(data[i], est.value);
        dtheta[i] = psi.psi_dtheta(data[i], est.value);
    }
    double mean_dtheta = 0.0;
    for (double v : dtheta) mean_dtheta += v;
    mean_dtheta /= static_cast<double>(n);

    AifReport report;
    report.method = AifReport::Method::closed_form;
    double numerator = 0.0;
    if (p.is_one()) {
        const std::size_t star = argmax_abs(dx);
        numerator = std::abs(dx[star]);
        report.diagnostics["nstar"] = static_cast<double>(star);
        report.value = numerator / std::abs(mean_dtheta);
    } else if (p.is_infinity()) {
        for (double v : dx) numerator += std::abs(v);
        report.value = numerator / (static_cast<double>(n) * std::abs(mean_dtheta));
    } else {
        const double q = p.conjugate();
        double s = 0.0;
        for (double v : dx) s += std::pow(std::abs(v), q);
        numerator = std::pow(s / static_cast<double>(n), (p.value() - 1.0) / p.value());
        report.value = numerator / std::abs(mean_dtheta);
    }
    report.diagnostics["numerator"] = numerator;
    report.diagnostics["denominator"] = std::abs(mean_dtheta);
    report.diagnostics["estimate"] = est.value;
    return report;
}

AifReport aif_finite_eta(const PsiSpec& psi, std::span<const double> data, NormOrder p,
                         std::span<const double> eta_grid, const SolveOptions& opts) {
    if (eta_grid.size() < 3)
        fail(errc::invalid_parameter, "aif_finite_eta: eta grid needs >= 3 points");
    for (std::size_t i = 0; i < eta_grid.size(); ++i) {
        if (!(eta_grid[i] > 0.0))
            fail(errc::invalid_parameter, "aif_finite_eta: eta grid must be positive");
        if (i > 0 && !(eta_grid[i] < eta_grid[i - 1]))
            fail(errc::invalid_parameter, "aif_finite_eta: eta grid must be decreasing");
    }

    AifReport report;
    report.method = AifReport::Method::finite_eta_extrapolation;
    for (double eta : eta_grid) {
        const AttackPlan plan = optimal_attack(psi, data, eta, p, opts);
        report.eta_curve.emplace_back(eta, plan.realized_shift / eta);
    }

    // Least-squares intercept of shift/eta = aif + k eta; the Taylor
    // remainder of the realized shift is O(eta^2), so the ratio is linear.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(report.eta_curve.size());
    for (auto& [x, y] : report.eta_curve) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    report.value = (sy * sxx - sx * sxy) / (m * sxx - sx * sx);
    report.diagnostics["slope"] = (m * sxy - sx * sy) / (m * sxx - sx * sx);

    // The ratio sequence should drift monotonically toward the limit; jitter
    // beyond first-order size suggests eta is too large or too small.
    const double tol = 1e-7 + 10.0 * std::abs(report.diagnostics["slope"]) * eta_grid[0];
    for (std::size_t i = 2; i < report.eta_curve.size(); ++i) {
        const double d1 = report.eta_curve[i - 1].second - report.eta_curve[i - 2].second;
        const double d2 = report.eta_curve[i].second - report.eta_curve[i - 1].second;
        if (d1 * d2 < 0.0 && std::min(std::abs(d1), std::abs(d2)) > tol)
            report.convergence_warning = true;
    }
    return report;
}

BruteForceResult brute_force_max_shift(
    const std::function<double(std::span<const double>)>& estimator, std::span<const double> data,
    double eta, NormOrder p, int grid_per_dim) {
    const std::size_t n = data.size();
    const double base = estimator(data);

    // Largest single-coordinate move allowed by the budget.
    double reach;
    if (p.is_one())
        reach = static_cast<double>(n) * eta;
    else if (p.is_infinity())
        reach = eta;
    else
        reach = std::pow(static_cast<double>(n), 1.0 / p.value()) * eta;

    const int g = grid_per_dim;
    std::vector<double> ticks(g);
    for (int i = 0; i < g; ++i)
        ticks[i] = -reach + 2.0 * reach * static_cast<double>(i) / (g - 1);

    std::size_t cells = 1;
    for (std::size_t i = 0; i < n; ++i) cells *= static_cast<std::size_t>(g);

    const double budget = static_cast<double>(n) * std::pow(eta, p.is_infinity() ? 1.0 : p.value());
    auto feasible = [&](const std::vector<double>& delta) {
        if (p.is_infinity()) {
            for (double d : delta)
                if (std::abs(d) > eta * (1.0 + 1e-12)) return false;
            return true;
        }
        double s = 0.0;
        for (double d : delta) s += std::pow(std::abs(d), p.value());
        return s <= budget * (1.0 + 1e-12);
    };

    const unsigned threads = std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    std::vector<BruteForceResult> best(threads);
    std::vector<std::size_t> best_cell(threads, 0);
    auto worker = [&](unsigned tid) {
        std::vector<double> delta(n), moved(n);
        BruteForceResult local;
        std::size_t local_cell = 0;
        for (std::size_t cell = tid; cell < cells; cell += threads) {
            std::size_t rest = cell;
            for (std::size_t d = 0; d < n; ++d) {
                delta[d] = ticks[rest % g];
                rest /= g;
            }
            if (!feasible(delta)) continue;
            for (std::size_t d = 0; d < n; ++d) moved[d] = data[d] + delta[d];
            const double shift = std::abs(estimator(moved) - base);
            if (shift > local.shift || (shift == local.shift && local.delta.empty())) {
                local.shift = shift;
                local.delta = delta;
                local_cell = cell;
            }
        }
        best[tid] = std::move(local);
        best_cell[tid] = local_cell;
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& t : pool) t.join();

    // Deterministic merge: highest shift, lowest cell index on ties.
    std::size_t win = 0;
    for (unsigned t = 1; t < threads; ++t) {
        if (best[t].shift > best[win].shift ||
            (best[t].shift == best[win].shift && best_cell[t] < best_cell[win]))
            win = t;
    }
    if (best[win].delta.empty()) best[win].delta.assign(n, 0.0);
    return best[win];
}

AttackPlan brute_force_attack(const PsiSpec& psi, std::span<const double> data, double eta,
                              NormOrder p, int grid_per_dim) {
    if (data.size() > 4)
        fail(errc::oracle_size, "brute_force_attack: N > 4 would explode the search grid");
    if (grid_per_dim < 11)
        fail(errc::invalid_parameter, "brute_force_attack: need at least 11 grid points per dim");

    auto estimator = [&psi](std::span<const double> x) { return solve(psi, x).value; };
    BruteForceResult r = brute_force_max_shift(estimator, data, eta, p, grid_per_dim);

    AttackPlan plan;
    plan.delta = std::move(r.delta);
    plan.eta = eta;
    plan.p = p;
    plan.realized_shift = r.shift;
    const MEstimate est = solve(psi, data);
    const Sensitivity sens = sensitivity(psi, data, est);
    for (std::size_t i = 0; i < plan.delta.size(); ++i)
        plan.predicted_shift += sens.c[i] * plan.delta[i];
    plan.predicted_shift = std::abs(plan.predicted_shift);
    return plan;
}

}  // namespace airob
