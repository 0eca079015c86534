#include "airob/psi.hpp"

#include <cmath>

#include "airob/errors.hpp"

namespace airob {

PsiSpec location_psi(std::string label, std::function<double(double)> core,
                     std::function<double(double)> core_prime, std::vector<double> breakpoints) {
    PsiSpec spec;
    spec.kind = PsiKind::location;
    spec.label = std::move(label);
    spec.psi = [core](double x, double theta) { return core(x - theta); };
    spec.psi_dx = [core_prime](double x, double theta) { return core_prime(x - theta); };
    spec.psi_dtheta = [core_prime](double x, double theta) { return -core_prime(x - theta); };
    spec.breakpoints = std::move(breakpoints);
    return spec;
}

PsiSpec scale_psi(std::string label, std::function<double(double)> core,
                  std::function<double(double)> core_prime, std::vector<double> breakpoints) {
    PsiSpec spec;
    spec.kind = PsiKind::scale;
    spec.label = std::move(label);
    spec.psi = [core](double x, double theta) { return core(x / theta); };
    spec.psi_dx = [core_prime](double x, double theta) { return core_prime(x / theta) / theta; };
    spec.psi_dtheta = [core_prime](double x, double theta) {
        const double u = x / theta;
        return -u * core_prime(u) / theta;
    };
    spec.breakpoints = std::move(breakpoints);
    return spec;
}

PsiSpec mean_psi() {
    return location_psi(
        "mean", [](double u) { return u; }, [](double) { return 1.0; });
}

PsiSpec huber_psi(double b) {
    if (!(b > 0.0) || !std::isfinite(b))
        fail(errc::invalid_parameter, "huber: clipping parameter b must satisfy 0 < b < inf");
    return location_psi(
        "huber(" + std::to_string(b) + ")",
        [b](double u) { return std::min(b, std::max(u, -b)); },
        [b](double u) { return (u > -b && u < b) ? 1.0 : 0.0; }, {-b, b});
}

PsiSpec gaussian_scale_mle_psi() {
    return scale_psi(
        "gaussian-scale-mle", [](double u) { return u * u - 1.0; },
        [](double u) { return 2.0 * u; });
}

PsiSpec builtin_psi(const std::string& name, double b) {
    if (name == "mean") return mean_psi();
    if (name == "huber") return huber_psi(b);
    if (name == "gaussian-scale-mle") return gaussian_scale_mle_psi();
    fail(errc::invalid_parameter, "unknown builtin psi: " + name);
}

}  // namespace airob
