#include "airob/population.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "airob/attack.hpp"
#include "airob/errors.hpp"

namespace airob {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Breakpoints of psi(., theta) in x coordinates.
std::vector<double> x_breakpoints(const PsiSpec& psi, double theta) {
    std::vector<double> out;
    out.reserve(psi.breakpoints.size());
    for (double b : psi.breakpoints) {
        switch (psi.kind) {
            case PsiKind::location: out.push_back(b + theta); break;
            case PsiKind::scale: out.push_back(b * theta); break;
            default: out.push_back(b); break;
        }
    }
    return out;
}

PopulationContext make_context(DistributionModel model, PsiSpec psi, double theta) {
    PopulationContext ctx{std::move(model), std::move(psi), theta, 0.0};
    ctx.fisher_residual =
        ctx.model.expect([&](double x) { return ctx.psi.psi(x, ctx.theta); },
                         x_breakpoints(ctx.psi, ctx.theta));
    return ctx;
}

double golden_max(const RealFn& f, double lo, double hi) {
    static const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < 80 && (b - a) > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        }
    }
    return std::max(f1, f2);
}

}  // namespace

PopulationContext PopulationContext::location(DistributionModel f0, PsiSpec psi) {
    return make_context(std::move(f0), std::move(psi), 0.0);
}
PopulationContext PopulationContext::scale(DistributionModel f1, PsiSpec psi) {
    return make_context(std::move(f1), std::move(psi), 1.0);
}
PopulationContext PopulationContext::general(DistributionModel model, PsiSpec psi, double theta) {
    return make_context(std::move(model), std::move(psi), theta);
}

SupResult sup_abs_over_support(const RealFn& f, const DistributionModel& model,
                               const std::vector<double>& breakpoints) {
    const Interval sup = model.support();
    const Interval eff = model.effective_support();
    auto absf = [&f](double x) { return std::abs(f(x)); };

    // Candidate grid: quantile-spaced interior points, declared breakpoints
    // and their immediate neighborhoods, and the effective endpoints.
    const int kGrid = 4096;
    std::vector<double> xs;
    xs.reserve(kGrid + breakpoints.size() * 3 + 2);
    for (int i = 0; i <= kGrid; ++i) {
        const double u = (static_cast<double>(i) + 0.5) / (kGrid + 1);
        xs.push_back(model.quantile(u));
    }
    for (double b : breakpoints) {
        if (b > eff.lo && b < eff.hi) {
            xs.push_back(b);
            xs.push_back(std::nextafter(b, eff.lo));
            xs.push_back(std::nextafter(b, eff.hi));
        }
    }
    xs.push_back(eff.lo);
    xs.push_back(eff.hi);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    SupResult result;
    std::size_t best = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = absf(xs[i]);
        if (v > result.value) {
            result.value = v;
            result.arg = xs[i];
            best = i;
        }
    }
    const double lo_ref = xs[best > 0 ? best - 1 : best];
    const double hi_ref = xs[std::min(best + 1, xs.size() - 1)];
    if (hi_ref > lo_ref) {
        const double refined = golden_max(absf, lo_ref, hi_ref);
        if (refined > result.value) result.value = refined;
    }

    // Tail test for infinite support ends: |f| must grow strictly through a
    // quantile ladder reaching the effective endpoint, and keep growing at a
    // probe placed one support-width beyond it. A saturating function (a
    // clipped psi, tanh, a designed psi flat outside its active region)
    // fails one of the two.
    auto tail_unbounded = [&](bool upper) {
        static const double masses[] = {1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-15};
        double prev = -kInf;
        double last = 0.0;
        for (double mass : masses) {
            const double x = model.quantile(upper ? 1.0 - mass : mass);
            last = absf(x);
            if (!(last > prev)) return false;
            prev = last;
        }
        const double span = eff.hi - eff.lo;
        const double far = absf(upper ? eff.hi + span : eff.lo - span);
        return far > std::max(last, result.value) * (1.0 + 1e-6);
    };
    if (std::isinf(sup.hi) && tail_unbounded(true)) result.unbounded = true;
    if (!result.unbounded && std::isinf(sup.lo) && tail_unbounded(false)) result.unbounded = true;
    if (result.unbounded) result.value = kInf;
    return result;
}

AifReport aif_population(const PopulationContext& ctx, NormOrder p, double quad_tol) {
    const auto breaks = x_breakpoints(ctx.psi, ctx.theta);
    const double denom = ctx.model.expect(
        [&](double x) { return ctx.psi.psi_dtheta(x, ctx.theta); }, breaks, quad_tol);
    if (denom == 0.0)
        fail(errc::degenerate_estimator, "aif_population: E[d(psi)/d(theta)] vanishes");

    AifReport report;
    report.method = AifReport::Method::quadrature;
    report.diagnostics["denominator"] = std::abs(denom);
    report.diagnostics["fisher_residual"] = ctx.fisher_residual;

    auto dx = [&](double x) { return ctx.psi.psi_dx(x, ctx.theta); };
    if (p.is_one()) {
        const SupResult sup = sup_abs_over_support(dx, ctx.model, breaks);
        if (sup.unbounded) {
            report.value = kInf;
            report.diagnostics["unbounded"] = 1.0;
            return report;
        }
        report.diagnostics["numerator"] = sup.value;
        report.diagnostics["argsup"] = sup.arg;
        report.value = sup.value / std::abs(denom);
        return report;
    }
    double numerator;
    if (p.is_infinity()) {
        numerator = ctx.model.expect([&](double x) { return std::abs(dx(x)); }, breaks, quad_tol);
    } else {
        const double q = p.conjugate();
        const double moment = ctx.model.expect(
            [&](double x) { return std::pow(std::abs(dx(x)), q); }, breaks, quad_tol);
        numerator = std::pow(moment, (p.value() - 1.0) / p.value());
    }
    report.diagnostics["numerator"] = numerator;
    report.value = numerator / std::abs(denom);
    return report;
}

double influence_function(const PopulationContext& ctx, double x) {
    const double denom = ctx.model.expect(
        [&](double y) { return ctx.psi.psi_dtheta(y, ctx.theta); }, x_breakpoints(ctx.psi, ctx.theta));
    if (denom == 0.0)
        fail(errc::degenerate_estimator, "influence_function: E[d(psi)/d(theta)] vanishes");
    return ctx.psi.psi(x, ctx.theta) / (-denom);
}

double gross_error_sensitivity(const PopulationContext& ctx) {
    const auto breaks = x_breakpoints(ctx.psi, ctx.theta);
    const double denom =
        ctx.model.expect([&](double y) { return ctx.psi.psi_dtheta(y, ctx.theta); }, breaks);
    if (denom == 0.0)
        fail(errc::degenerate_estimator, "gross_error_sensitivity: E[d(psi)/d(theta)] vanishes");
    const SupResult sup = sup_abs_over_support(
        [&](double x) { return ctx.psi.psi(x, ctx.theta); }, ctx.model, breaks);
    if (sup.unbounded) return kInf;
    return sup.value / std::abs(denom);
}

std::vector<ConvergenceRow> aif_convergence_study(const PopulationContext& ctx, NormOrder p,
                                                  std::span<const std::size_t> n_grid,
                                                  std::uint64_t seed) {
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (!(n_grid[i] > n_grid[i - 1]))
            fail(errc::invalid_parameter, "aif_convergence_study: n grid must be increasing");
    const double population = aif_population(ctx, p).value;

    auto row_task = [&](std::size_t idx) {
        const std::size_t n = n_grid[idx];
        std::vector<double> data = ctx.model.sample(n, seed + idx);
        if (ctx.psi.kind == PsiKind::location && ctx.theta != 0.0)
            for (double& x : data) x += ctx.theta;
        if (ctx.psi.kind == PsiKind::scale && ctx.theta != 1.0)
            for (double& x : data) x *= ctx.theta;
        ConvergenceRow row;
        row.n = n;
        row.empirical_aif = aif_empirical(ctx.psi, data, p).value;
        row.population_aif = population;
        row.rel_error = std::abs(row.empirical_aif - population) /
                        (population != 0.0 ? std::abs(population) : 1.0);
        return row;
    };

    std::vector<std::future<ConvergenceRow>> futures;
    futures.reserve(n_grid.size());
    for (std::size_t i = 0; i < n_grid.size(); ++i)
        futures.push_back(std::async(std::launch::async, row_task, i));
    std::vector<ConvergenceRow> rows;
    rows.reserve(n_grid.size());
    for (auto& f : futures) rows.push_back(f.get());
    return rows;
}

}  // namespace airob
