#include "airob/l_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "airob/errors.hpp"
#include "airob/quadrature.hpp"

namespace airob {

LWeights weights_from_h(const std::function<double(double)>& h, std::size_t n) {
    if (n == 0) fail(errc::invalid_parameter, "weights_from_h: n must be >= 1");
    LWeights w;
    w.source = WeightSource::from_h;
    w.a.resize(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) / static_cast<double>(n);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
        w.a[i] = integral(h, lo, hi, {1e-12, 4000});
        total += w.a[i];
    }
    if (total == 0.0 || !std::isfinite(total))
        fail(errc::degenerate_weights, "weights_from_h: integral of h over (0,1) vanishes");
    for (double& v : w.a) v /= total;
    return w;
}

LWeights mean_weights(std::size_t n) {
    if (n == 0) fail(errc::invalid_parameter, "mean_weights: n must be >= 1");
    LWeights w;
    w.source = WeightSource::from_h;
    w.a.assign(n, 1.0 / static_cast<double>(n));
    return w;
}

LWeights median_weights(std::size_t n) {
    if (n == 0) fail(errc::invalid_parameter, "median_weights: n must be >= 1");
    LWeights w;
    w.source = WeightSource::median;
    w.a.assign(n, 0.0);
    if (n % 2 == 1) {
        w.a[n / 2] = 1.0;
    } else {
        w.a[n / 2 - 1] = 0.5;
        w.a[n / 2] = 0.5;
    }
    return w;
}

LWeights alpha_trimmed_weights(double alpha, std::size_t n) {
    if (!(alpha > 0.0) || !(alpha < 0.5))
        fail(errc::invalid_parameter, "alpha_trimmed_weights: alpha must lie in (0, 1/2)");
    if (n == 0) fail(errc::invalid_parameter, "alpha_trimmed_weights: n must be >= 1");
    const std::size_t cut = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));
    const std::size_t kept = n - 2 * cut;
    LWeights w;
    w.source = WeightSource::alpha_trimmed;
    w.alpha = alpha;
    w.a.assign(n, 0.0);
    for (std::size_t i = cut; i < n - cut; ++i) w.a[i] = 1.0 / static_cast<double>(kept);
    return w;
}

LWeights explicit_weights(std::vector<double> a) {
    if (a.empty()) fail(errc::invalid_parameter, "explicit_weights: empty weight vector");
    LWeights w;
    w.source = WeightSource::explicit_weights;
    w.a = std::move(a);
    return w;
}

LWeights weights_from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::io_error, "cannot open weights file: " + path);
    std::vector<double> a;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            std::size_t pos = 0;
            const double v = std::stod(line, &pos);
            a.push_back(v);
        } catch (const std::logic_error&) {
            if (lineno == 1) continue;  // header
            throw error(errc::parse_error,
                        "weights: parse error at line " + std::to_string(lineno));
        }
    }
    return explicit_weights(std::move(a));
}

void weights_to_csv(const LWeights& w, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw error(errc::io_error, "cannot write weights to " + path);
    out.precision(17);
    for (double v : w.a) out << v << '\n';
}

double l_estimate(const LWeights& w, std::span<const double> data) {
    if (data.size() != w.a.size())
        fail(errc::shape_mismatch, "l_estimate: data length " + std::to_string(data.size()) +
                                       " does not match weight length " +
                                       std::to_string(w.a.size()));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&data](std::size_t i, std::size_t j) { return data[i] < data[j]; });
    double value = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) value += w.a[i] * data[order[i]];
    return value;
}

AifReport l_aif(const LWeights& w, NormOrder p) {
    bool any = false;
    for (double v : w.a) any = any || v != 0.0;
    if (!any) fail(errc::degenerate_weights, "l_aif: all weights are zero");
    const double n = static_cast<double>(w.a.size());

    AifReport report;
    report.method = AifReport::Method::closed_form;
    if (p.is_one()) {
        std::size_t star = 0;
        for (std::size_t i = 1; i < w.a.size(); ++i)
            if (std::abs(w.a[i]) > std::abs(w.a[star])) star = i;
        report.diagnostics["nstar"] = static_cast<double>(star);
        report.value = n * std::abs(w.a[star]);
    } else if (p.is_infinity()) {
        double s = 0.0;
        for (double v : w.a) s += std::abs(v);
        report.value = s;
    } else {
        const double q = p.conjugate();
        double s = 0.0;
        for (double v : w.a) s += std::pow(std::abs(v), q);
        report.value = s / std::pow(s / n, 1.0 / p.value());
    }
    return report;
}

OrderingThreshold ordering_safety_threshold(std::span<const double> data, NormOrder p) {
    if (data.size() < 2)
        fail(errc::invalid_parameter, "ordering_safety_threshold: need at least two samples");
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        const double d = sorted[i] - sorted[i - 1];
        if (d > 0.0) gap = std::min(gap, d);
    }
    if (std::isinf(gap)) return {0.0, true};
    const double root = p.is_infinity()
                            ? 1.0
                            : std::pow(static_cast<double>(data.size()), 1.0 / p.value());
    return {gap / (2.0 * root), false};
}

}  // namespace airob
