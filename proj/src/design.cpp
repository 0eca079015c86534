#include "airob/design.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "airob/errors.hpp"
#include "airob/quadrature.hpp"

namespace airob {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Knot positions of a tabulated model: its density is piecewise constant,
// so every integral of psi'-derived quantities should split there.
std::vector<double> model_kinks(const DistributionModel& m) {
    if (auto table = m.tabulated_table()) return table->first;
    return {};
}

double piece_eval(const PsiPiece& p, const DistributionModel* model, double x) {
    double v = p.c0 + p.cx * x;
    if (p.cexp != 0.0) v += p.cexp * std::exp(x);
    if ((p.cFf != 0.0 || p.cCf != 0.0) && model) {
        const double f = model->pdf(x);
        if (f <= 0.0) return 0.0;
        const double F = model->cdf(x);
        v += (p.cFf * F + p.cCf * (1.0 - F)) / f;
    }
    return v;
}

json encode_bound(double v) {
    if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
    return json(v);
}

double decode_bound(const json& j) {
    if (j.is_string()) return j.get<std::string>() == "-inf" ? -kInf : kInf;
    return j.get<double>();
}

json model_to_json(const DistributionModel& m) {
    switch (m.family()) {
        case Family::standard_normal: return json{{"family", "standard-normal"}};
        case Family::exponential_rate1: return json{{"family", "exponential-rate-1"}};
        case Family::uniform: {
            auto p = m.uniform_params();
            return json{{"family", "uniform"}, {"a", p->first}, {"b", p->second}};
        }
        default: {
            auto t = m.tabulated_table();
            return json{{"family", "tabulated"}, {"x", t->first}, {"pdf", t->second}};
        }
    }
}

DistributionModel model_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "standard-normal") return DistributionModel::standard_normal();
    if (family == "exponential-rate-1") return DistributionModel::exponential_rate1();
    if (family == "uniform")
        return DistributionModel::uniform(j.at("a").get<double>(), j.at("b").get<double>());
    if (family == "tabulated")
        return DistributionModel::tabulated(j.at("x").get<std::vector<double>>(),
                                            j.at("pdf").get<std::vector<double>>());
    throw error(errc::parse_error, "designed psi: unknown model family " + family);
}

}  // namespace

double DesignedPsi::gprime(double x) const {
    const DistributionModel* m = model ? &*model : nullptr;
    for (const auto& p : pieces) {
        if (x < p.lo) return 0.0;
        if (x <= p.hi) {
            const double v = piece_eval(p, m, x);
            // Tradeoff designs are nonnegative by construction; clamp the
            // boundary rounding. Min-AIF designs may be genuinely negative.
            if (xi && v < 0.0) return 0.0;
            return v;
        }
    }
    return 0.0;
}

double DesignedPsi::accumulate(double x) const {
    auto g = [this](double t) { return gprime(t); };
    QuadratureOptions opts{1e-12, 4000, model ? model_kinks(*model) : std::vector<double>{}};
    if (pieces.size() == 1 && std::isinf(pieces.front().lo)) {
        // Single piece reaching -inf (min-AIF designs): integrate from the
        // finite reference point.
        return integral(g, anchor_x_, x, opts);
    }
    double cum = 0.0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (x <= pieces[i].lo) return cum;
        cum = cum_at_lo_[i];
        if (x <= pieces[i].hi) return cum + integral(g, pieces[i].lo, x, opts);
        cum = cum_at_lo_[i + 1];
    }
    return cum;
}

double DesignedPsi::psi(double x) const { return accumulate(x) - anchor_const_; }

std::vector<Interval> DesignedPsi::active_region() const {
    std::vector<Interval> out;
    out.reserve(pieces.size());
    for (const auto& p : pieces) out.push_back({p.lo, p.hi});
    return out;
}

void DesignedPsi::finalize() {
    std::sort(pieces.begin(), pieces.end(),
              [](const PsiPiece& a, const PsiPiece& b) { return a.lo < b.lo; });
    anchor_x_ = (!pieces.empty() && std::isfinite(pieces.front().lo)) ? pieces.front().lo : 0.0;

    // Cumulative integral of psi' at every piece boundary.
    cum_at_lo_.assign(pieces.size() + 1, 0.0);
    auto g = [this](double t) { return gprime(t); };
    QuadratureOptions opts{1e-12, 4000, model ? model_kinks(*model) : std::vector<double>{}};
    if (!(pieces.size() == 1 && std::isinf(pieces.front().lo))) {
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            double piece_int = 0.0;
            if (std::isfinite(pieces[i].lo) && std::isfinite(pieces[i].hi))
                piece_int = integral(g, pieces[i].lo, pieces[i].hi, opts);
            cum_at_lo_[i + 1] = cum_at_lo_[i] + piece_int;
        }
    }

    anchor_const_ = 0.0;
    if (model) {
        std::vector<double> edges;
        for (const auto& p : pieces) {
            if (std::isfinite(p.lo)) edges.push_back(p.lo);
            if (std::isfinite(p.hi)) edges.push_back(p.hi);
        }
        anchor_const_ = model->expect([this](double x) { return accumulate(x); }, edges, 1e-11);
    }

    if (!pieces.empty() && std::isfinite(pieces.front().lo)) {
        psi_neg_inf_ = -anchor_const_;  // psi is constant below the first piece
    } else if (!model) {
        psi_neg_inf_ = -kInf;
    } else {
        const Interval eff = model->effective_support();
        const double span = std::max(1.0, eff.hi - eff.lo);
        const double v1 = psi(eff.lo);
        const double v2 = psi(eff.lo - span);
        if (std::abs(v2) > std::abs(v1) * (1.0 + 1e-9) + 1e-12)
            psi_neg_inf_ = v2 > v1 ? kInf : -kInf;
        else
            psi_neg_inf_ = v1;
    }
}

PsiSpec DesignedPsi::to_psi_spec() const {
    auto self = std::make_shared<const DesignedPsi>(*this);
    std::vector<double> breakpoints;
    for (const auto& p : self->pieces) {
        if (std::isfinite(p.lo)) breakpoints.push_back(p.lo);
        if (std::isfinite(p.hi)) breakpoints.push_back(p.hi);
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    auto core = [self](double u) { return self->psi(u); };
    auto core_prime = [self](double u) { return self->gprime(u); };
    const std::string label = kind == PsiKind::scale ? "designed-scale" : "designed-location";
    if (kind == PsiKind::scale) return scale_psi(label, core, core_prime, breakpoints);
    return location_psi(label, core, core_prime, breakpoints);
}

std::vector<std::pair<double, double>> DesignedPsi::sample_curve(int points) const {
    double lo = -5.0, hi = 5.0;
    if (!pieces.empty() && std::isfinite(pieces.front().lo) && std::isfinite(pieces.back().hi)) {
        const double span = std::max(1.0, pieces.back().hi - pieces.front().lo);
        lo = pieces.front().lo - 0.2 * span;
        hi = pieces.back().hi + 0.2 * span;
    } else if (model) {
        const Interval eff = model->effective_support();
        lo = eff.lo;
        hi = eff.hi;
    }
    if (model) {
        const Interval sup = model->support();
        if (std::isfinite(sup.lo)) lo = std::max(lo, sup.lo - 1.0);
        if (std::isfinite(sup.hi)) hi = std::min(hi, sup.hi + 1.0);
    }
    std::vector<std::pair<double, double>> curve;
    curve.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        curve.emplace_back(x, psi(x));
    }
    return curve;
}

std::string DesignedPsi::to_json_string() const {
    json j;
    j["schema_version"] = 1;
    j["type"] = "designed-psi";
    j["kind"] = kind == PsiKind::scale ? "scale" : "location";
    j["model"] = model ? model_to_json(*model) : json(nullptr);
    json ps = json::array();
    for (const auto& p : pieces)
        ps.push_back(json{{"lo", encode_bound(p.lo)},
                          {"hi", encode_bound(p.hi)},
                          {"c0", p.c0},
                          {"cx", p.cx},
                          {"cFf", p.cFf},
                          {"cCf", p.cCf},
                          {"cexp", p.cexp}});
    j["pieces"] = ps;
    j["multipliers"] =
        json{{"nu", multipliers.nu}, {"theta1", multipliers.theta1}, {"theta2", multipliers.theta2}};
    j["xi"] = xi ? json(*xi) : json(nullptr);
    j["psi_neg_inf"] = encode_bound(psi_neg_inf_);
    json diag;
    for (const auto& [k, v] : diagnostics) diag[k] = std::isfinite(v) ? json(v) : encode_bound(v);
    j["diagnostics"] = diag;
    return j.dump(2);
}

DesignedPsi DesignedPsi::from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw error(errc::parse_error, std::string("designed psi: bad JSON: ") + e.what());
    }
    try {
        DesignedPsi d;
        const std::string kind = j.at("kind").get<std::string>();
        d.kind = kind == "scale" ? PsiKind::scale : PsiKind::location;
        if (!j.at("model").is_null()) d.model = model_from_json(j["model"]);
        for (const auto& p : j.at("pieces")) {
            PsiPiece piece;
            piece.lo = decode_bound(p.at("lo"));
            piece.hi = decode_bound(p.at("hi"));
            piece.c0 = p.value("c0", 0.0);
            piece.cx = p.value("cx", 0.0);
            piece.cFf = p.value("cFf", 0.0);
            piece.cCf = p.value("cCf", 0.0);
            piece.cexp = p.value("cexp", 0.0);
            d.pieces.push_back(piece);
        }
        const auto& m = j.at("multipliers");
        d.multipliers = {m.at("nu").get<double>(), m.at("theta1").get<double>(),
                         m.at("theta2").get<double>()};
        if (!j.at("xi").is_null()) d.xi = j["xi"].get<double>();
        if (j.contains("diagnostics")) {
            for (const auto& [k, v] : j["diagnostics"].items()) {
                if (v.is_number())
                    d.diagnostics[k] = v.get<double>();
                else if (v.is_string())
                    d.diagnostics[k] = decode_bound(v);
            }
        }
        d.finalize();
        return d;
    } catch (const json::exception& e) {
        throw error(errc::parse_error, std::string("designed psi: missing field: ") + e.what());
    }
}

void DesignedPsi::save_json(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw error(errc::io_error, "cannot write designed psi to " + path);
    out << to_json_string() << '\n';
}

DesignedPsi DesignedPsi::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot read designed psi from " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_string(buf.str());
}

// ---------------------------------------------------------------------------
// Active-set search for the tradeoff designs.
// ---------------------------------------------------------------------------

namespace {

// The optimality system is solved in the reduced ratios r_i = theta_i / nu:
// dividing the stationarity condition by nu leaves
//   hatg(x) = max(0, base(x) - (r2 + (r1 - r2) F(x)) / f(x)),
// and the normalization then fixes nu = 1 / int base hatg f dx. Extreme
// budgets push theta_i through dozens of orders of magnitude; the ratios are
// searched in log space, which stays perfectly conditioned where a Newton
// iteration on the raw multipliers would collapse.
struct ShapeProblem {
    DistributionModel F;
    bool scale = false;
    std::vector<double> grid;  // quantile-spaced probe grid over the support
    std::vector<double> kinks;  // density discontinuities (tabulated knots)
    Interval eff{};

    explicit ShapeProblem(const DistributionModel& model, bool scale_kind)
        : F(model), scale(scale_kind) {
        kinks = model_kinks(model);
        eff = F.effective_support();
        const int n = 2048;
        grid.reserve(n + 3);
        grid.push_back(eff.lo);
        for (int i = 0; i <= n; ++i) {
            const double u = (static_cast<double>(i) + 0.5) / (n + 1);
            grid.push_back(F.quantile(u));
        }
        grid.push_back(eff.hi);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }

    double base(double x) const { return scale ? x : 1.0; }

    /// Sign function of the active-region condition nu base f > th2 + (th1-th2) F.
    double h(double x, double r1, double r2) const {
        return base(x) * F.pdf(x) - r2 - (r1 - r2) * F.cdf(x);
    }

    double hatg(double x, double r1, double r2) const {
        const double f = F.pdf(x);
        if (f <= 0.0) return 0.0;
        const double v = base(x) - (r2 + (r1 - r2) * F.cdf(x)) / f;
        return v > 0.0 ? v : 0.0;
    }

    struct Region {
        std::vector<Interval> intervals;
    };

    double bisect_boundary(double lo, double hi, double r1, double r2) const {
        double flo = h(lo, r1, r2);
        for (int i = 0; i < 100 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi));
             ++i) {
            const double mid = 0.5 * (lo + hi);
            const double fm = h(mid, r1, r2);
            if ((flo > 0.0) == (fm > 0.0)) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    // The condition can stay positive far beyond the effective support when
    // the ratios are tiny (trimming happens extremely deep in the tail), so
    // the probe list is extended geometrically until the condition fails;
    // the density underflows eventually, which bounds every region.
    Region find_region(double r1, double r2) const {
        const Interval sup = F.support();
        std::vector<double> xs = grid;
        if (std::isinf(sup.hi) && h(xs.back(), r1, r2) > 0.0) {
            double step = std::max(1.0, 0.05 * (eff.hi - eff.lo));
            double x = xs.back();
            for (int k = 0; k < 80 && h(x, r1, r2) > 0.0; ++k) {
                x += step;
                step *= 2.0;
                xs.push_back(x);
            }
        }
        if (std::isinf(sup.lo) && h(xs.front(), r1, r2) > 0.0) {
            double step = std::max(1.0, 0.05 * (eff.hi - eff.lo));
            double x = xs.front();
            std::vector<double> ext;
            for (int k = 0; k < 80 && h(x, r1, r2) > 0.0; ++k) {
                x -= step;
                step *= 2.0;
                ext.push_back(x);
            }
            xs.insert(xs.begin(), ext.rbegin(), ext.rend());
        }

        Region region;
        bool inside = h(xs.front(), r1, r2) > 0.0;
        double start = xs.front();
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const bool now = h(xs[i], r1, r2) > 0.0;
            if (now != inside) {
                const double boundary = bisect_boundary(xs[i - 1], xs[i], r1, r2);
                if (inside)
                    region.intervals.push_back({start, boundary});
                else
                    start = boundary;
                inside = now;
            }
        }
        if (inside) region.intervals.push_back({start, xs.back()});
        // Snap to finite support ends.
        if (!region.intervals.empty()) {
            if (region.intervals.front().lo == xs.front() && std::isfinite(sup.lo))
                region.intervals.front().lo = sup.lo;
            if (region.intervals.back().hi == xs.back() && std::isfinite(sup.hi))
                region.intervals.back().hi = sup.hi;
        }
        return region;
    }

    double over_region(const Region& region, const RealFn& fn) const {
        double total = 0.0;
        for (const auto& iv : region.intervals) {
            if (!(iv.hi > iv.lo)) continue;
            total += integral(fn, iv.lo, iv.hi, {1e-10, 20000, kinks});
        }
        return total;
    }

    struct Integrals {
        double c1 = 0.0;       // int hatg F dx, right-tail IF constraint
        double c2 = 0.0;       // int hatg (1-F) dx, left-tail IF constraint
        double normint = 0.0;  // int base hatg f dx
        double obj = 0.0;      // int hatg^2 f dx
    };

    Integrals evaluate(double r1, double r2, const Region& region) const {
        Integrals out;
        auto gg = [&](double x) { return hatg(x, r1, r2); };
        out.c1 = over_region(region, [&](double x) { return gg(x) * F.cdf(x); });
        out.c2 = over_region(region, [&](double x) { return gg(x) * (1.0 - F.cdf(x)); });
        out.normint = over_region(region, [&](double x) { return base(x) * gg(x) * F.pdf(x); });
        out.obj = over_region(region, [&](double x) { return gg(x) * gg(x) * F.pdf(x); });
        return out;
    }

    /// Normalized value of one tail constraint at the given ratios.
    double constraint(double r1, double r2, bool first) const {
        const Region region = find_region(r1, r2);
        if (region.intervals.empty()) return 0.0;
        auto gg = [&](double x) { return hatg(x, r1, r2); };
        const double normint =
            over_region(region, [&](double x) { return base(x) * gg(x) * F.pdf(x); });
        if (!(normint > 0.0)) return 0.0;
        const double c = first
                             ? over_region(region, [&](double x) { return gg(x) * F.cdf(x); })
                             : over_region(region,
                                           [&](double x) { return gg(x) * (1.0 - F.cdf(x)); });
        return c / normint;
    }
};

struct CaseResult {
    bool ok = false;
    double r1 = 0.0, r2 = 0.0;
    ShapeProblem::Region region;
    ShapeProblem::Integrals integrals;
    double objective = kInf;  // E[g^2] / E[base g]^2 in reduced form
    int actives = 0;
};

/// Bisection on t = log(r) for constraint(r) = xi, walking first to find a
/// bracket. The constraint decreases as trimming deepens, so the walk is
/// directional; bisection itself tolerates local non-monotonicity.
bool solve_ratio(const ShapeProblem& sp, bool vary_first, double other, bool first_constraint,
                 double xi, double* out) {
    auto value_at = [&](double t) {
        const double r = std::exp(t);
        return sp.constraint(vary_first ? r : other, vary_first ? other : r, first_constraint);
    };
    const double t_min = -700.0, t_max = 60.0;
    double t_lo = 0.0, t_hi = 0.0;
    double v0 = value_at(0.0);
    if (v0 > xi) {
        while (v0 > xi && t_hi < t_max) {
            t_lo = t_hi;
            t_hi += 4.0;
            v0 = value_at(t_hi);
        }
        if (v0 > xi) return false;
    } else {
        double v_lo = v0;
        while (v_lo <= xi && t_lo > t_min) {
            t_hi = t_lo;
            t_lo -= 4.0;
            v_lo = value_at(t_lo);
        }
        if (v_lo <= xi) return false;
    }
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (value_at(mid) > xi)
            t_lo = mid;
        else
            t_hi = mid;
    }
    *out = std::exp(0.5 * (t_lo + t_hi));
    return true;
}

CaseResult finish_case(const ShapeProblem& sp, double r1, double r2, double xi, int actives) {
    CaseResult res;
    res.r1 = r1;
    res.r2 = r2;
    res.actives = actives;
    res.region = sp.find_region(r1, r2);
    if (res.region.intervals.empty()) return res;
    res.integrals = sp.evaluate(r1, r2, res.region);
    if (!(res.integrals.normint > 0.0)) return res;
    const double c1 = res.integrals.c1 / res.integrals.normint;
    const double c2 = res.integrals.c2 / res.integrals.normint;
    const double tol = 1e-8 * std::max(1.0, xi);
    if (c1 > xi + tol || c2 > xi + tol) return res;
    res.objective = res.integrals.obj / (res.integrals.normint * res.integrals.normint);
    res.ok = true;
    return res;
}

CaseResult solve_case(const ShapeProblem& sp, bool use1, bool use2, double xi) {
    if (!use1 && !use2) return finish_case(sp, 0.0, 0.0, xi, 0);
    if (use1 != use2) {
        double r = 0.0;
        if (!solve_ratio(sp, use1, 0.0, use1, xi, &r)) return {};
        return finish_case(sp, use1 ? r : 0.0, use1 ? 0.0 : r, xi, 1);
    }

    // Both tails active. Symmetric distributions solve on the diagonal
    // r1 = r2; try that first, then fall back to the nested iteration.
    {
        auto diag = [&](double t) {
            const double r = std::exp(t);
            return sp.constraint(r, r, true);
        };
        double t_lo = 0.0, t_hi = 0.0, v = diag(0.0);
        bool bracket = false;
        if (v > xi) {
            while (v > xi && t_hi < 60.0) {
                t_lo = t_hi;
                t_hi += 4.0;
                v = diag(t_hi);
            }
            bracket = v <= xi;
        } else {
            double v_lo = v;
            while (v_lo <= xi && t_lo > -700.0) {
                t_hi = t_lo;
                t_lo -= 4.0;
                v_lo = diag(t_lo);
            }
            bracket = v_lo > xi;
        }
        if (bracket) {
            for (int i = 0; i < 100; ++i) {
                const double mid = 0.5 * (t_lo + t_hi);
                if (diag(mid) > xi)
                    t_lo = mid;
                else
                    t_hi = mid;
            }
            const double r = std::exp(0.5 * (t_lo + t_hi));
            if (std::abs(sp.constraint(r, r, false) - xi) <= 1e-7 * std::max(1.0, xi)) {
                CaseResult res = finish_case(sp, r, r, xi, 2);
                if (res.ok) return res;
            }
        }
    }

    // Nested iteration: the inner solve keeps the right-tail constraint at
    // xi, the outer bisection drives the left-tail constraint to xi.
    auto outer_value = [&](double t2, double* r1_out) {
        const double r2 = std::exp(t2);
        double r1 = 0.0;
        if (!solve_ratio(sp, true, r2, true, xi, &r1))
            return std::numeric_limits<double>::quiet_NaN();
        if (r1_out) *r1_out = r1;
        return sp.constraint(r1, r2, false);
    };
    double lo = -700.0;
    const double v_start = outer_value(lo, nullptr);
    if (std::isnan(v_start) || v_start <= xi) return {};  // theta2 would not bind
    double hi = lo;
    bool bracket = false;
    for (double t2 = lo + 8.0; t2 <= 60.0; t2 += 8.0) {
        const double v = outer_value(t2, nullptr);
        if (std::isnan(v)) break;
        hi = t2;
        if (v <= xi) {
            bracket = true;
            break;
        }
        lo = t2;
    }
    if (!bracket) return {};
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double v = outer_value(mid, nullptr);
        if (std::isnan(v) || v <= xi)
            hi = mid;
        else
            lo = mid;
    }
    const double r2 = std::exp(0.5 * (lo + hi));
    double r1 = 0.0;
    if (!solve_ratio(sp, true, r2, true, xi, &r1)) return {};
    return finish_case(sp, r1, r2, xi, 2);
}

DesignedPsi build_design(const DistributionModel& model, bool scale, double xi,
                         const CaseResult& best) {
    DesignedPsi d;
    d.kind = scale ? PsiKind::scale : PsiKind::location;
    d.model = model;
    d.xi = xi;
    const double nu = 1.0 / best.integrals.normint;
    d.multipliers.nu = nu;
    d.multipliers.theta1 = nu * best.r1;
    d.multipliers.theta2 = nu * best.r2;
    for (const auto& iv : best.region.intervals) {
        PsiPiece p;
        p.lo = iv.lo;
        p.hi = iv.hi;
        if (scale)
            p.cx = nu;
        else
            p.c0 = nu;
        p.cFf = -d.multipliers.theta1;
        p.cCf = -d.multipliers.theta2;
        d.pieces.push_back(p);
    }
    d.finalize();
    d.diagnostics["aif"] = std::sqrt(best.objective);
    d.diagnostics["active_lo"] = best.region.intervals.front().lo;
    d.diagnostics["active_hi"] = best.region.intervals.back().hi;
    d.diagnostics["a"] = best.region.intervals.back().hi;
    // psi is monotone with flat tails, so gamma* sits just outside the
    // active region (the normalization makes the IF denominator one).
    const double left = d.psi(best.region.intervals.front().lo - 1.0);
    const double right = d.psi(best.region.intervals.back().hi + 1.0);
    d.diagnostics["gamma_star"] = std::max(std::abs(left), std::abs(right));
    return d;
}

DesignedPsi tradeoff_design(const DistributionModel& model, double xi, bool scale) {
    if (!(xi > 0.0)) fail(errc::invalid_parameter, "tradeoff design: xi must be positive");
    ShapeProblem sp(model, scale);

    auto best_of = [&sp](double budget) -> std::optional<CaseResult> {
        std::optional<CaseResult> best;
        for (int c = 0; c < 4; ++c) {
            CaseResult res = solve_case(sp, c & 1, c & 2, budget);
            if (!res.ok) continue;
            if (!best || res.objective < best->objective - 1e-9 ||
                (std::abs(res.objective - best->objective) <= 1e-9 && res.actives > best->actives))
                best = std::move(res);
        }
        return best;
    };

    std::optional<CaseResult> best = best_of(xi);
    if (!best) {
        double hi = std::max(2.0 * xi, 2.0);
        int guard = 0;
        while (!best_of(hi) && guard++ < 24) hi *= 2.0;
        std::ostringstream os;
        if (guard >= 24) {
            os << "tradeoff design: xi = " << xi << " is infeasible and no feasible budget was "
               << "found up to " << hi;
        } else {
            double lo = xi;
            for (int i = 0; i < 16; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (best_of(mid))
                    hi = mid;
                else
                    lo = mid;
            }
            os << "tradeoff design: xi = " << xi
               << " is infeasible; smallest feasible xi found by bisection is " << hi;
        }
        fail(errc::infeasible_budget, os.str());
    }
    return build_design(model, scale, xi, *best);
}

}  // namespace

DesignedPsi min_aif_location() {
    DesignedPsi d;
    d.kind = PsiKind::location;
    d.pieces.push_back({-kInf, kInf, 1.0, 0.0, 0.0, 0.0, 0.0});
    d.multipliers = {1.0, 0.0, 0.0};
    d.diagnostics["min_aif"] = 1.0;
    d.finalize();
    return d;
}

DesignedPsi min_aif_scale(const DistributionModel& f1) {
    const double second_moment = f1.expect([](double x) { return x * x; }, {}, 1e-10);
    if (!(second_moment > 0.0) || !std::isfinite(second_moment))
        fail(errc::degenerate_estimator, "min_aif_scale: E[X^2] must be finite and positive");
    DesignedPsi d;
    d.kind = PsiKind::scale;
    d.model = f1;
    const Interval sup = f1.support();
    PsiPiece p;
    p.lo = sup.lo;
    p.hi = sup.hi;
    p.cx = 1.0 / second_moment;
    d.pieces.push_back(p);
    d.multipliers = {1.0 / second_moment, 0.0, 0.0};
    d.diagnostics["second_moment"] = second_moment;
    d.diagnostics["min_aif"] = 1.0 / std::sqrt(second_moment);
    d.finalize();
    return d;
}

DesignedPsi tradeoff_location(const DistributionModel& f0, double xi) {
    return tradeoff_design(f0, xi, false);
}

DesignedPsi tradeoff_scale(const DistributionModel& f1, double xi) {
    return tradeoff_design(f1, xi, true);
}

DesignedPsi exponential_tradeoff(double xi) {
    if (!(xi > 1.0))
        fail(errc::out_of_regime,
             "exponential_tradeoff: requires xi > 1 (the left-tail multiplier vanishes only "
             "there); use tradeoff_location for smaller budgets");

    // Root of e^{-a} ((xi+1) a + xi + 2) = xi + 2 - a, solved for the gap
    // s = xi + 2 - a in log space: for large xi the root pinches against
    // xi + 2 and the direct difference underflows while s itself stays
    // perfectly representable.
    auto gap_residual = [xi](double s) {
        const double a = (xi + 2.0) - s;
        return std::exp(-a) * ((xi + 1.0) * a + (xi + 2.0)) - s;
    };
    double t_lo = std::log(1e-300), t_hi = std::log(xi + 1.0);
    if (!(gap_residual(std::exp(t_lo)) > 0.0) || !(gap_residual(std::exp(t_hi)) < 0.0))
        fail(errc::no_root, "exponential_tradeoff: gap equation not bracketed");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (gap_residual(std::exp(mid)) > 0.0)
            t_lo = mid;
        else
            t_hi = mid;
    }
    const double s = std::exp(0.5 * (t_lo + t_hi));
    const double a = (xi + 2.0) - s;

    // The positive root should be unique; confirm on a scan that skips the
    // degenerate root at a = 0.
    {
        auto a_residual = [xi](double av) {
            return std::exp(-av) * ((xi + 1.0) * av + (xi + 2.0)) - ((xi + 2.0) - av);
        };
        int crossings = 0;
        double prev = a_residual(1e-4 * (xi + 2.0));
        for (int i = 1; i <= 2048; ++i) {
            const double av = (xi + 2.0) * (1e-4 + (1.0 - 2e-4) * i / 2048.0);
            const double cur = a_residual(av);
            if ((prev < 0.0) != (cur < 0.0)) ++crossings;
            prev = cur;
        }
        if (crossings != 1)
            fail(errc::ambiguous_root,
                 "exponential_tradeoff: expected a unique positive root, found " +
                     std::to_string(crossings) + " sign changes");
    }

    const double theta1 = s / (a * a);
    const double nu = 1.0 + a * theta1;  // same as (xi+2)/a but keeps precision at tiny theta1
    DesignedPsi d;
    d.kind = PsiKind::location;
    d.model = DistributionModel::exponential_rate1();
    d.xi = xi;
    d.multipliers = {nu, theta1, 0.0};
    PsiPiece p;
    p.lo = 0.0;
    p.hi = std::log((nu + theta1) / theta1);  // where psi' crosses zero
    p.c0 = nu + theta1;
    p.cexp = -theta1;
    d.pieces.push_back(p);
    d.finalize();
    d.diagnostics["a"] = p.hi;
    d.diagnostics["gap"] = s;
    const double obj =
        integral([&d](double x) { return d.gprime(x) * d.gprime(x) * std::exp(-x); }, 0.0, p.hi,
                 {1e-12, 20000});
    d.diagnostics["aif"] = std::sqrt(obj);
    d.diagnostics["gamma_star"] = std::max(-d.psi_neg_inf(), d.psi(p.hi + 1.0));
    return d;
}

std::vector<TradeoffRow> tradeoff_curve(const DistributionModel& f,
                                        std::span<const double> xi_grid, PsiKind kind) {
    for (std::size_t i = 1; i < xi_grid.size(); ++i)
        if (!(xi_grid[i] > xi_grid[i - 1]))
            fail(errc::invalid_parameter, "tradeoff_curve: xi grid must be increasing");
    if (kind == PsiKind::general)
        fail(errc::invalid_parameter, "tradeoff_curve: kind must be location or scale");

    auto task = [&f, kind](double xi) {
        TradeoffRow row;
        row.xi = xi;
        try {
            const DesignedPsi d =
                kind == PsiKind::scale ? tradeoff_scale(f, xi) : tradeoff_location(f, xi);
            row.aif = d.diagnostics.at("aif");
            row.gamma_star = d.diagnostics.at("gamma_star");
        } catch (const error& e) {
            row.skipped = true;
            row.reason = e.what();
        }
        return row;
    };
    std::vector<std::future<TradeoffRow>> futures;
    futures.reserve(xi_grid.size());
    for (double xi : xi_grid) futures.push_back(std::async(std::launch::async, task, xi));
    std::vector<TradeoffRow> rows;
    rows.reserve(xi_grid.size());
    for (auto& fu : futures) rows.push_back(fu.get());
    return rows;
}

KktResiduals kkt_residuals(const DesignedPsi& design) {
    if (!design.model)
        fail(errc::invalid_parameter,
             "kkt_residuals: design carries no distribution; attach one first");
    const DistributionModel& model = *design.model;
    const Interval eff = model.effective_support();
    const bool scale = design.kind == PsiKind::scale;

    auto g = [&design](double x) { return design.gprime(x); };
    auto clip_lo = [&eff](double v) { return std::isinf(v) ? eff.lo : v; };
    auto clip_hi = [&eff](double v) { return std::isinf(v) ? eff.hi : v; };

    KktResiduals out;
    const QuadratureOptions qopts{1e-11, 20000, model_kinks(model)};
    double norm = 0.0, c1 = 0.0, c2 = 0.0;
    for (const auto& piece : design.pieces) {
        const double lo = clip_lo(piece.lo), hi = clip_hi(piece.hi);
        if (!(hi > lo)) continue;
        norm += integral([&](double x) { return (scale ? x : 1.0) * g(x) * model.pdf(x); }, lo, hi,
                         qopts);
        c1 += integral([&](double x) { return g(x) * model.cdf(x); }, lo, hi, qopts);
        c2 += integral([&](double x) { return g(x) * (1.0 - model.cdf(x)); }, lo, hi, qopts);
    }
    out.normalization = std::abs(norm - 1.0);
    out.c1 = c1;
    out.c2 = c2;
    if (design.xi) {
        out.slack1 = std::abs(design.multipliers.theta1 * (c1 - *design.xi));
        out.slack2 = std::abs(design.multipliers.theta2 * (c2 - *design.xi));
        out.feas1 = std::max(0.0, c1 - *design.xi);
        out.feas2 = std::max(0.0, c2 - *design.xi);
    }

    std::vector<double> edges;
    for (const auto& piece : design.pieces) {
        if (std::isfinite(piece.lo)) edges.push_back(piece.lo);
        if (std::isfinite(piece.hi)) edges.push_back(piece.hi);
    }
    out.fisher = std::abs(model.expect([&design](double x) { return design.psi(x); }, edges, 1e-9));

    out.min_gprime = kInf;
    for (const auto& piece : design.pieces) {
        const double lo = clip_lo(piece.lo), hi = clip_hi(piece.hi);
        for (int i = 0; i <= 512; ++i) {
            const double x = lo + (hi - lo) * static_cast<double>(i) / 512.0;
            out.min_gprime = std::min(out.min_gprime, g(x));
        }
    }
    out.max_outside = 0.0;
    auto inside_any = [&design](double x) {
        for (const auto& piece : design.pieces)
            if (x >= piece.lo && x <= piece.hi) return true;
        return false;
    };
    for (int i = 0; i <= 256; ++i) {
        const double x = eff.lo + (eff.hi - eff.lo) * static_cast<double>(i) / 256.0;
        if (!inside_any(x)) out.max_outside = std::max(out.max_outside, std::abs(g(x)));
    }
    return out;
}

}  // namespace airob
