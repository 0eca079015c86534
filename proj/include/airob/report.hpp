#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace airob {

/// How an AIF value was obtained, plus whatever intermediate quantities the
/// calculation wants to surface (numerator, denominator, argmax index, ...).
struct AifReport {
    enum class Method { closed_form, finite_eta_extrapolation, quadrature };

    double value = 0.0;
    Method method = Method::closed_form;
    std::map<std::string, double> diagnostics{};
    /// (eta, realized_shift / eta) pairs for the finite-eta method.
    std::vector<std::pair<double, double>> eta_curve{};
    bool convergence_warning = false;

    static const char* method_name(Method m) {
        switch (m) {
            case Method::closed_form: return "closed-form";
            case Method::finite_eta_extrapolation: return "finite-eta-extrapolation";
            default: return "quadrature";
        }
    }
};

}  // namespace airob
