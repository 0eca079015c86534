#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "airob/quadrature.hpp"

namespace airob {

enum class Family { standard_normal, exponential_rate1, uniform, tabulated };

struct Interval {
    double lo;
    double hi;
};

/// Univariate distribution with density, cdf, quantile and inverse-transform
/// sampling. Instances are immutable values; copies share the underlying
/// implementation and are safe to use concurrently.
class DistributionModel {
  public:
    static DistributionModel standard_normal();
    static DistributionModel exponential_rate1();
    static DistributionModel uniform(double a, double b);

    /// Tabulated density on strictly increasing knots. The model's cdf is the
    /// piecewise-linear interpolant of the accumulated cell masses and its
    /// pdf is the (piecewise-constant) derivative of that cdf; the supplied
    /// pdf values only set the cell masses via the trapezoid rule.
    static DistributionModel tabulated(std::vector<double> x, std::vector<double> pdf);

    /// Two-column CSV "x,pdf" with strictly increasing x. A single header
    /// line is tolerated.
    static DistributionModel tabulated_from_csv(const std::string& path);

    /// Parse a CLI-style selector: "standard-normal", "exponential-rate-1",
    /// "uniform:a,b", or a path to a tabulated CSV.
    static DistributionModel parse(const std::string& selector);

    Family family() const;
    Interval support() const;
    std::string label() const;

    /// (a, b) for the uniform family, empty otherwise.
    std::optional<std::pair<double, double>> uniform_params() const;
    /// Original (x, pdf) table for the tabulated family, empty otherwise.
    std::optional<std::pair<std::vector<double>, std::vector<double>>> tabulated_table() const;

    double pdf(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;

    /// Finite interval carrying all but ~2e-15 of the probability mass; used
    /// to truncate improper integrals and as the probe range for suprema.
    Interval effective_support() const;

    /// n i.i.d. draws by inverse-transform sampling; one (model, n, seed)
    /// triple always yields the same vector.
    std::vector<double> sample(std::size_t n, std::uint64_t seed) const;

    /// E[integrand(X)] by adaptive quadrature against the density, split at
    /// the given integrand breakpoints. Infinite tails are truncated where
    /// the mass outside is below ~1e-15.
    double expect(const RealFn& integrand, const std::vector<double>& breakpoints = {},
                  double abs_tol = 1e-9) const;

    struct Impl;

  private:
    explicit DistributionModel(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
    std::shared_ptr<const Impl> impl_;
};

/// Standard normal helpers shared by the library and the test oracles.
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace airob
