#include "airob/m_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "airob/errors.hpp"

namespace airob {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    double hi = *mid;
    if (n % 2 == 1) return hi;
    double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

struct EquationSum {
    const PsiSpec& psi;
    std::span<const double> data;
    double operator()(double theta) const {
        double s = 0.0;
        for (double x : data) s += psi.psi(x, theta);
        return s;
    }
};

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

// Bisection on [lo, hi] (S(lo) has the opposite sign of S(hi)) down to
// width_tol, then a few secant steps to polish the residual.
double refine_root(const EquationSum& S, double lo, double hi, double s_lo, double width_tol,
                   int* iterations) {
    int it = 0;
    while (hi - lo > width_tol * std::max(1.0, std::max(std::abs(lo), std::abs(hi))) && it < 200) {
        const double mid = 0.5 * (lo + hi);
        const double s_mid = S(mid);
        ++it;
        if (s_mid == 0.0) {
            lo = hi = mid;
            break;
        }
        if (sign_of(s_mid) == sign_of(s_lo)) {
            lo = mid;
            s_lo = s_mid;
        } else {
            hi = mid;
        }
    }
    double root = 0.5 * (lo + hi);
    double f_root = S(root);
    double prev = lo, f_prev = s_lo;
    for (int k = 0; k < 4 && f_root != 0.0; ++k) {
        const double df = f_root - f_prev;
        if (df == 0.0) break;
        double next = root - f_root * (root - prev) / df;
        if (!(next >= lo && next <= hi)) break;
        prev = root;
        f_prev = f_root;
        root = next;
        f_root = S(root);
        ++it;
        if (std::abs(f_root) >= std::abs(f_prev)) {
            root = prev;
            break;
        }
    }
    if (iterations) *iterations += it;
    return root;
}

}  // namespace

MEstimate solve(const PsiSpec& psi, std::span<const double> data, const SolveOptions& opts) {
    if (data.empty()) fail(errc::invalid_parameter, "solve: data must be nonempty");
    EquationSum S{psi, data};

    // Initial bracket: robust location guess, or a positive scale range.
    double lo, hi;
    if (psi.kind == PsiKind::scale) {
        double m = 0.0;
        for (double x : data) m = std::max(m, std::abs(x));
        if (m == 0.0) m = 1.0;
        lo = 1e-8 * m;
        hi = 2.0 * m * m;
    } else {
        std::vector<double> buf(data.begin(), data.end());
        const double med = median_of(buf);
        for (double& v : buf) v = std::abs(v - med);
        double mad = median_of(buf);
        if (mad == 0.0) mad = std::max(1.0, 0.1 * std::abs(med));
        lo = med - mad;
        hi = med + mad;
    }

    double s_lo = S(lo), s_hi = S(hi);
    int doublings = 0;
    while (sign_of(s_lo) == sign_of(s_hi) && sign_of(s_lo) != 0) {
        if (++doublings > opts.max_doublings) {
            std::ostringstream os;
            os << "solve: no sign change of the estimating equation after " << opts.max_doublings
               << " bracket doublings (last bracket [" << lo << ", " << hi << "])";
            fail(errc::no_root, os.str());
        }
        const double width = hi - lo;
        lo -= width;
        hi += width;
        if (psi.kind == PsiKind::scale && lo <= 0.0) lo = std::min(hi * 1e-16, 1e-300);
        s_lo = S(lo);
        s_hi = S(hi);
    }

    // Scan for sign changes; several of them means psi is not monotone in
    // theta and we refuse to pick a root silently. A grid point that lands
    // exactly on a root is recorded once as a degenerate cell (a contiguous
    // zero streak also counts once), not as two crossings around it.
    struct Cell {
        double lo, hi, s_lo, s_hi;
    };
    std::vector<Cell> cells;
    double prev_x = lo, prev_s = s_lo;
    bool zero_streak = sign_of(s_lo) == 0;
    if (zero_streak) cells.push_back({lo, lo, 0.0, 0.0});
    for (int i = 1; i <= opts.scan_points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / opts.scan_points;
        const double s = S(x);
        if (sign_of(s) == 0) {
            if (!zero_streak) cells.push_back({x, x, 0.0, 0.0});
            zero_streak = true;
            prev_x = x;
            prev_s = s;
            continue;
        }
        if (sign_of(prev_s) != 0 && sign_of(prev_s) != sign_of(s))
            cells.push_back({prev_x, x, prev_s, s});
        zero_streak = false;
        prev_x = x;
        prev_s = s;
    }
    if (cells.empty()) cells.push_back({lo, hi, s_lo, s_hi});
    if (cells.size() > 1) {
        std::ostringstream os;
        os << "solve: estimating equation has " << cells.size() << " bracketed roots:";
        for (auto& c : cells) {
            int dummy = 0;
            os << ' ' << refine_root(S, c.lo, c.hi, c.s_lo, opts.width_tol, &dummy);
        }
        fail(errc::ambiguous_root, os.str());
    }

    MEstimate est;
    est.bracket_lo = lo;
    est.bracket_hi = hi;
    est.iterations = opts.scan_points + doublings;
    est.value =
        refine_root(S, cells[0].lo, cells[0].hi, cells[0].s_lo, opts.width_tol, &est.iterations);
    est.residual = S(est.value);
    const double bound = opts.residual_tol * static_cast<double>(data.size());
    if (std::abs(est.residual) > bound) {
        // A jump discontinuity of psi in theta could leave a residual even at
        // machine-width brackets; all supported psi are continuous, so treat
        // this as no root.
        std::ostringstream os;
        os << "solve: residual " << est.residual << " exceeds " << bound << " at theta "
           << est.value;
        fail(errc::no_root, os.str());
    }
    return est;
}

Sensitivity sensitivity(const PsiSpec& psi, std::span<const double> data, const MEstimate& est) {
    const double theta = est.value;
    for (std::size_t n = 0; n < data.size(); ++n) {
        const double u = psi.canonical_arg(data[n], theta);
        for (double b : psi.breakpoints) {
            if (std::abs(u - b) < 1e-9) {
                std::ostringstream os;
                os << "sensitivity: sample " << n << " lies on a psi' breakpoint (argument " << u
                   << " vs breakpoint " << b << ")";
                fail(errc::breakpoint_ambiguity, os.str());
            }
        }
    }
    Sensitivity sens;
    sens.c.resize(data.size());
    double denom = 0.0;
    for (double x : data) denom += psi.psi_dtheta(x, theta);
    if (denom == 0.0)
        fail(errc::degenerate_estimator, "sensitivity: sum of d(psi)/d(theta) vanishes");
    sens.denom = denom;
    for (std::size_t n = 0; n < data.size(); ++n)
        sens.c[n] = -psi.psi_dx(data[n], theta) / denom;
    return sens;
}

}  // namespace airob
