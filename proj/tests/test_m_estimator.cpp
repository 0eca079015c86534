#include <doctest.h>

#include <cmath>

#include "airob/attack.hpp"
#include "airob/errors.hpp"
#include "airob/m_estimator.hpp"
#include "helpers.hpp"

using namespace airob;
using namespace airob::testing;

TEST_CASE("builtin psi values") {
    CHECK(mean_psi().psi(5.0, 2.0) == 3.0);
    CHECK(huber_psi(1.5).psi(10.0, 0.0) == 1.5);
    CHECK(huber_psi(1.5).psi(-10.0, 0.0) == -1.5);
    CHECK(gaussian_scale_mle_psi().psi(2.0, 1.0) == 3.0);
    CHECK_THROWS_AS(huber_psi(0.0), error);
    CHECK_THROWS_AS(huber_psi(-1.0), error);
    CHECK_THROWS_AS(builtin_psi("bogus"), error);
}

TEST_CASE("psi partials agree with central differences") {
    const PsiSpec specs[] = {mean_psi(), huber_psi(1.5), gaussian_scale_mle_psi()};
    for (const auto& spec : specs) {
        const auto xs = uniform_data(40, 99, -3.0, 3.0);
        for (double x : xs) {
            const double theta = spec.kind == PsiKind::scale ? 1.3 : 0.2;
            const double u = spec.canonical_arg(x, theta);
            bool near_break = false;
            for (double b : spec.breakpoints) near_break = near_break || std::abs(u - b) < 1e-3;
            if (near_break) continue;
            const double h = 1e-6;
            const double fdx = (spec.psi(x + h, theta) - spec.psi(x - h, theta)) / (2.0 * h);
            const double fdt = (spec.psi(x, theta + h) - spec.psi(x, theta - h)) / (2.0 * h);
            CHECK(std::abs(fdx - spec.psi_dx(x, theta)) < 1e-4);
            CHECK(std::abs(fdt - spec.psi_dtheta(x, theta)) < 1e-4);
        }
    }
}

TEST_CASE("kind structure: location depends on x - theta, scale on x / theta") {
    const auto loc = huber_psi(2.0);
    const auto sca = gaussian_scale_mle_psi();
    const auto probes = uniform_data(20, 5, -2.0, 2.0);
    for (double t : probes) {
        CHECK(loc.psi(1.0 + t, 0.5 + t) == doctest::Approx(loc.psi(1.0, 0.5)).epsilon(1e-12));
        const double s = 1.0 + std::abs(t);
        CHECK(sca.psi(1.7 * s, 1.1 * s) == doctest::Approx(sca.psi(1.7, 1.1)).epsilon(1e-12));
    }
}

TEST_CASE("solve: sample mean") {
    const std::vector<double> data{1.0, 2.0, 3.0};
    const MEstimate est = solve(mean_psi(), data);
    CHECK(est.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(est.residual) <= 3e-10);
}

TEST_CASE("solve: huber on symmetric data") {
    const std::vector<double> data{-1.0, 0.0, 1.0};
    CHECK(solve(huber_psi(1.5), data).value == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("solve: scale MLE root is the root-mean-square") {
    // With psi(u) = u^2 - 1 evaluated at u = x/theta, the estimating equation
    // sum (x_n/T)^2 = N pins T to sqrt(mean of squares).
    const std::vector<double> data{1.0, 2.0, 2.0, 3.0};
    const MEstimate est = solve(gaussian_scale_mle_psi(), data);
    CHECK(est.value == doctest::Approx(std::sqrt(4.5)).epsilon(1e-12));
    CHECK(est.value * est.value == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("sensitivity: mean weights are uniform") {
    const std::vector<double> data{1.0, 2.0, 3.0};
    const auto sens = sensitivity(mean_psi(), data, solve(mean_psi(), data));
    for (double c : sens.c) CHECK(c == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sensitivity: clipped huber sample has zero influence") {
    // Two-sided outliers keep the estimate at zero so the inner samples stay
    // strictly inside the corners (a single outlier at 10 would park the
    // estimate exactly b/3 away and put a sample on the corner itself).
    const auto psi = huber_psi(1.5);
    const std::vector<double> data{-1.0, 0.0, 1.0, 10.0, -10.0};
    const auto est = solve(psi, data);
    const auto sens = sensitivity(psi, data, est);
    CHECK(sens.c[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(sens.c[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(sens.c[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(sens.c[3] == 0.0);
    CHECK(sens.c[4] == 0.0);
    for (std::size_t i = 0; i < data.size(); ++i)
        CHECK(std::abs(sens.c[i] - fd_sensitivity(psi, data, i)) < 1e-4);
}

TEST_CASE("sensitivity: scale MLE matches x_n / (N T) and the re-solve oracle") {
    const auto psi = gaussian_scale_mle_psi();
    const std::vector<double> data{1.0, 2.0, 2.0, 3.0};
    const auto est = solve(psi, data);
    const auto sens = sensitivity(psi, data, est);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(sens.c[i] ==
              doctest::Approx(data[i] / (4.0 * est.value)).epsilon(1e-10));
        CHECK(close_rel(sens.c[i], fd_sensitivity(psi, data, i), 1e-4));
    }
}

TEST_CASE("finite-difference consistency on random data") {
    const PsiSpec specs[] = {mean_psi(), huber_psi(1.2), gaussian_scale_mle_psi()};
    for (const auto& spec : specs) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            auto data = uniform_data(17, seed * 31, 0.1, 3.0);
            const auto est = solve(spec, data);
            bool collision = false;
            for (double x : data)
                for (double b : spec.breakpoints)
                    collision = collision || std::abs(spec.canonical_arg(x, est.value) - b) < 1e-4;
            if (collision) continue;
            const auto sens = sensitivity(spec, data, est);
            for (std::size_t i = 0; i < data.size(); ++i) {
                const double fd = fd_sensitivity(spec, data, i);
                if (std::abs(fd) < 1e-12)
                    CHECK(std::abs(sens.c[i]) < 1e-8);
                else
                    CHECK(close_rel(sens.c[i], fd, 1e-4));
            }
        }
    }
}

TEST_CASE("user-supplied logistic psi behaves like the builtins") {
    // A smooth non-builtin location psi exercises the generic solver path.
    const auto logistic = location_psi(
        "logistic", [](double u) { return std::tanh(u); },
        [](double u) { const double c = std::cosh(u); return 1.0 / (c * c); });
    const auto data = uniform_data(15, 321, -2.0, 2.0);
    const auto est = solve(logistic, data);
    CHECK(std::abs(est.residual) <= 15.0 * 1e-10);
    const auto sens = sensitivity(logistic, data, est);
    for (std::size_t i = 0; i < data.size(); ++i)
        CHECK(close_rel(sens.c[i], fd_sensitivity(logistic, data, i), 1e-4));
    // psi' >= 0, so the location lower bound applies at every norm order.
    for (const NormOrder& p :
         {NormOrder::one(), NormOrder::finite(2.0), NormOrder::infinity()})
        CHECK(aif_empirical(logistic, data, p).value >= 1.0 - 1e-12);
}

TEST_CASE("location and scale equivariance") {
    auto data = uniform_data(15, 77, -1.0, 4.0);
    const double t = 0.731;
    const auto psi = huber_psi(1.5);
    const double base = solve(psi, data).value;
    auto shifted = data;
    for (double& x : shifted) x += t;
    CHECK(std::abs(solve(psi, shifted).value - (base + t)) < 1e-9);

    const auto spsi = gaussian_scale_mle_psi();
    auto pos = uniform_data(15, 78, 0.5, 3.0);
    const double sbase = solve(spsi, pos).value;
    const double s = 2.25;
    auto stretched = pos;
    for (double& x : stretched) x *= s;
    CHECK(close_rel(solve(spsi, stretched).value, s * sbase, 1e-9));
}

TEST_CASE("psi scaling invariance: c psi leaves estimate and sensitivities alone") {
    const auto psi = huber_psi(1.5);
    PsiSpec scaled = psi;
    const double c = 3.7;
    scaled.psi = [psi, c](double x, double t) { return c * psi.psi(x, t); };
    scaled.psi_dx = [psi, c](double x, double t) { return c * psi.psi_dx(x, t); };
    scaled.psi_dtheta = [psi, c](double x, double t) { return c * psi.psi_dtheta(x, t); };
    const auto data = uniform_data(12, 5, -2.0, 2.0);
    const auto e1 = solve(psi, data);
    const auto e2 = solve(scaled, data);
    CHECK(std::abs(e1.value - e2.value) < 1e-12);
    const auto s1 = sensitivity(psi, data, e1);
    const auto s2 = sensitivity(scaled, data, e2);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(std::abs(s1.c[i] - s2.c[i]) < 1e-12);
}

TEST_CASE("solver error paths") {
    PsiSpec constant;
    constant.kind = PsiKind::general;
    constant.label = "constant";
    constant.psi = [](double, double) { return 1.0; };
    constant.psi_dx = [](double, double) { return 0.0; };
    constant.psi_dtheta = [](double, double) { return 0.0; };
    const std::vector<double> data{0.0, 1.0};
    try {
        solve(constant, data);
        CHECK(false);
    } catch (const error& e) {
        CHECK(e.code() == errc::no_root);
    }

    PsiSpec wavy;
    wavy.kind = PsiKind::general;
    wavy.label = "wavy";
    wavy.psi = [](double, double t) { return std::sin(10.0 * t); };
    wavy.psi_dx = [](double, double) { return 0.0; };
    wavy.psi_dtheta = [](double, double t) { return 10.0 * std::cos(10.0 * t); };
    try {
        solve(wavy, data);
        CHECK(false);
    } catch (const error& e) {
        CHECK(e.code() == errc::ambiguous_root);
    }
}

TEST_CASE("sample on a huber corner raises breakpoint_ambiguity naming the index") {
    const auto psi = huber_psi(1.5);
    const std::vector<double> data{-1.5, 0.0, 1.5};
    const auto est = solve(psi, data);
    try {
        sensitivity(psi, data, est);
        CHECK(false);
    } catch (const error& e) {
        CHECK(e.code() == errc::breakpoint_ambiguity);
        CHECK(std::string(e.what()).find("sample") != std::string::npos);
    }
}

TEST_CASE("degenerate estimator: vanishing theta-derivative") {
    // sum psi vanishes identically in theta for this data, so any theta is a
    // root; the sensitivity denominator is then exactly zero.
    PsiSpec flat;
    flat.kind = PsiKind::general;
    flat.label = "flat-theta";
    flat.psi = [](double x, double) { return x - 0.5; };
    flat.psi_dx = [](double, double) { return 1.0; };
    flat.psi_dtheta = [](double, double) { return 0.0; };
    const std::vector<double> data{0.25, 0.75};
    const auto est = solve(flat, data);
    try {
        sensitivity(flat, data, est);
        CHECK(false);
    } catch (const error& e) {
        CHECK(e.code() == errc::degenerate_estimator);
    }
}
