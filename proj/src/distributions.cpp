#include "airob/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "airob/errors.hpp"

namespace airob {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailMass = 1e-15;
}  // namespace

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// Acklam's rational approximation refined by one Halley step; good to full
// double precision over (0, 1).
double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0)) {
        if (p == 0.0) return -kInf;
        if (p == 1.0) return kInf;
        fail(errc::invalid_parameter, "normal_quantile: p outside [0,1]");
    }
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    // Halley refinement against the erfc-based cdf.
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

struct DistributionModel::Impl {
    virtual ~Impl() = default;
    virtual Family family() const = 0;
    virtual Interval support() const = 0;
    virtual std::string label() const = 0;
    virtual double pdf(double x) const = 0;
    virtual double cdf(double x) const = 0;
    virtual double quantile(double p) const = 0;
    virtual bool sampleable() const { return true; }
    virtual std::optional<std::pair<double, double>> uniform() const { return std::nullopt; }
    virtual std::optional<std::pair<std::vector<double>, std::vector<double>>> table() const {
        return std::nullopt;
    }
};

namespace {

struct NormalImpl final : DistributionModel::Impl {
    Family family() const override { return Family::standard_normal; }
    Interval support() const override { return {-kInf, kInf}; }
    std::string label() const override { return "standard-normal"; }
    double pdf(double x) const override { return normal_pdf(x); }
    double cdf(double x) const override { return normal_cdf(x); }
    double quantile(double p) const override { return normal_quantile(p); }
};

struct ExponentialImpl final : DistributionModel::Impl {
    Family family() const override { return Family::exponential_rate1; }
    Interval support() const override { return {0.0, kInf}; }
    std::string label() const override { return "exponential-rate-1"; }
    double pdf(double x) const override { return x < 0.0 ? 0.0 : std::exp(-x); }
    double cdf(double x) const override { return x < 0.0 ? 0.0 : -std::expm1(-x); }
    double quantile(double p) const override {
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return kInf;
        return -std::log1p(-p);
    }
};

struct UniformImpl final : DistributionModel::Impl {
    UniformImpl(double a, double b) : a_(a), b_(b) {
        if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
            fail(errc::invalid_parameter, "uniform(a,b) requires finite a < b");
    }
    Family family() const override { return Family::uniform; }
    Interval support() const override { return {a_, b_}; }
    std::string label() const override {
        std::ostringstream os;
        os << "uniform:" << a_ << ',' << b_;
        return os.str();
    }
    double pdf(double x) const override { return (x < a_ || x > b_) ? 0.0 : 1.0 / (b_ - a_); }
    double cdf(double x) const override {
        if (x <= a_) return 0.0;
        if (x >= b_) return 1.0;
        return (x - a_) / (b_ - a_);
    }
    double quantile(double p) const override { return a_ + p * (b_ - a_); }
    std::optional<std::pair<double, double>> uniform() const override { return {{a_, b_}}; }
    double a_, b_;
};

// Piecewise-linear cdf built from trapezoid cell masses of the supplied
// density samples; pdf is its piecewise-constant derivative.
struct TabulatedImpl final : DistributionModel::Impl {
    TabulatedImpl(std::vector<double> x, std::vector<double> p)
        : knots_(std::move(x)), orig_pdf_(p) {
        if (knots_.size() < 2 || knots_.size() != p.size())
            fail(errc::invalid_parameter, "tabulated density needs >= 2 (x, pdf) rows");
        for (std::size_t i = 0; i < knots_.size(); ++i) {
            if (!std::isfinite(knots_[i]) || !std::isfinite(p[i]))
                fail(errc::invalid_parameter, "tabulated density: non-finite entry");
            if (i > 0 && !(knots_[i] > knots_[i - 1]))
                fail(errc::invalid_parameter, "tabulated density: x must be strictly increasing");
            if (p[i] < 0.0) fail(errc::invalid_parameter, "tabulated density: negative pdf value");
        }
        cum_.assign(knots_.size(), 0.0);
        for (std::size_t i = 1; i < knots_.size(); ++i)
            cum_[i] = cum_[i - 1] + 0.5 * (p[i] + p[i - 1]) * (knots_[i] - knots_[i - 1]);
        const double total = cum_.back();
        if (!(total > 0.0)) fail(errc::invalid_parameter, "tabulated density integrates to zero");
        for (double& c : cum_) c /= total;
        density_.assign(knots_.size() - 1, 0.0);
        for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
            density_[i] = (cum_[i + 1] - cum_[i]) / (knots_[i + 1] - knots_[i]);
    }

    Family family() const override { return Family::tabulated; }
    Interval support() const override { return {knots_.front(), knots_.back()}; }
    std::string label() const override { return "tabulated"; }

    std::size_t cell(double x) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - knots_.begin());
        if (i == 0) return 0;
        if (i >= knots_.size()) return knots_.size() - 2;
        return i - 1;
    }

    double pdf(double x) const override {
        if (x < knots_.front() || x > knots_.back()) return 0.0;
        return density_[cell(x)];
    }
    double cdf(double x) const override {
        if (x <= knots_.front()) return 0.0;
        if (x >= knots_.back()) return 1.0;
        std::size_t i = cell(x);
        return cum_[i] + density_[i] * (x - knots_[i]);
    }
    double quantile(double p) const override {
        if (p <= 0.0) return knots_.front();
        if (p >= 1.0) return knots_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), p);
        std::size_t i = static_cast<std::size_t>(it - cum_.begin());
        if (i == 0) return knots_.front();
        if (i >= cum_.size()) return knots_.back();
        --i;
        if (density_[i] <= 0.0) return knots_[i + 1];  // flat stretch: jump across
        return knots_[i] + (p - cum_[i]) / density_[i];
    }
    // Zero-mass cells make the cdf non-invertible, so the quantile table is
    // not valid for inverse-transform sampling. pdf/cdf/expectations stay
    // usable; quantile() adopts a right-continuous convention for grids.
    bool sampleable() const override {
        for (double d : density_)
            if (!(d > 0.0)) return false;
        return true;
    }

    std::optional<std::pair<std::vector<double>, std::vector<double>>> table() const override {
        return {{knots_, orig_pdf_}};
    }

    std::vector<double> knots_;
    std::vector<double> orig_pdf_;
    std::vector<double> cum_;
    std::vector<double> density_;
};

}  // namespace

DistributionModel DistributionModel::standard_normal() {
    return DistributionModel(std::make_shared<NormalImpl>());
}
DistributionModel DistributionModel::exponential_rate1() {
    return DistributionModel(std::make_shared<ExponentialImpl>());
}
DistributionModel DistributionModel::uniform(double a, double b) {
    return DistributionModel(std::make_shared<UniformImpl>(a, b));
}
DistributionModel DistributionModel::tabulated(std::vector<double> x, std::vector<double> pdf) {
    return DistributionModel(std::make_shared<TabulatedImpl>(std::move(x), std::move(pdf)));
}

DistributionModel DistributionModel::tabulated_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open tabulated density file: " + path);
    std::vector<double> xs, ps;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double x, p;
        if (!(row >> x >> p)) {
            if (lineno == 1) continue;  // header
            throw error(errc::parse_error,
                        "tabulated density: parse error at line " + std::to_string(lineno));
        }
        xs.push_back(x);
        ps.push_back(p);
    }
    return tabulated(std::move(xs), std::move(ps));
}

DistributionModel DistributionModel::parse(const std::string& selector) {
    if (selector == "standard-normal" || selector == "normal") return standard_normal();
    if (selector == "exponential-rate-1" || selector == "exponential" ||
        selector == "shifted-exponential")
        return exponential_rate1();
    if (selector.rfind("uniform", 0) == 0) {
        auto colon = selector.find(':');
        std::string args = colon == std::string::npos ? "0,1" : selector.substr(colon + 1);
        auto comma = args.find(',');
        if (comma == std::string::npos)
            throw error(errc::invalid_config, "uniform selector needs 'uniform:a,b'");
        try {
            double a = std::stod(args.substr(0, comma));
            double b = std::stod(args.substr(comma + 1));
            return uniform(a, b);
        } catch (const std::logic_error&) {
            throw error(errc::invalid_config, "uniform selector needs numeric 'uniform:a,b'");
        }
    }
    return tabulated_from_csv(selector);
}

Family DistributionModel::family() const { return impl_->family(); }
Interval DistributionModel::support() const { return impl_->support(); }
std::string DistributionModel::label() const { return impl_->label(); }
double DistributionModel::pdf(double x) const { return impl_->pdf(x); }
double DistributionModel::cdf(double x) const { return impl_->cdf(x); }
double DistributionModel::quantile(double p) const { return impl_->quantile(p); }
std::optional<std::pair<double, double>> DistributionModel::uniform_params() const {
    return impl_->uniform();
}
std::optional<std::pair<std::vector<double>, std::vector<double>>>
DistributionModel::tabulated_table() const {
    return impl_->table();
}

Interval DistributionModel::effective_support() const {
    Interval s = impl_->support();
    double lo = std::isinf(s.lo) ? impl_->quantile(kTailMass) : s.lo;
    double hi = std::isinf(s.hi) ? impl_->quantile(1.0 - kTailMass) : s.hi;
    return {lo, hi};
}

std::vector<double> DistributionModel::sample(std::size_t n, std::uint64_t seed) const {
    if (n == 0) fail(errc::invalid_parameter, "sample: n must be >= 1");
    if (!impl_->sampleable())
        fail(errc::unsupported_sampling,
             "tabulated model without a valid (strictly increasing) quantile table "
             "does not support sampling");
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        // 53-bit uniform strictly inside (0, 1); keeps the quantile finite.
        double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        out[i] = impl_->quantile(u);
    }
    return out;
}

double DistributionModel::expect(const RealFn& integrand, const std::vector<double>& breaks,
                                 double abs_tol) const {
    Interval t = effective_support();
    QuadratureOptions opts;
    opts.abs_tol = abs_tol;
    opts.breakpoints = breaks;
    if (impl_->family() == Family::tabulated) {
        const auto* tab = static_cast<const TabulatedImpl*>(impl_.get());
        opts.breakpoints.insert(opts.breakpoints.end(), tab->knots_.begin(), tab->knots_.end());
    }
    auto f = [this, &integrand](double x) { return integrand(x) * impl_->pdf(x); };
    return integrate(f, t.lo, t.hi, opts).value;
}

}  // namespace airob
