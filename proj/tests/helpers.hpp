#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "airob/m_estimator.hpp"
#include "airob/psi.hpp"

namespace airob::testing {

/// Deterministic uniform variates in (lo, hi) for test data.
inline std::vector<double> uniform_data(std::size_t n, std::uint64_t seed, double lo = -2.0,
                                        double hi = 2.0) {
    std::mt19937_64 rng(seed);
    std::vector<double> out(n);
    for (auto& v : out) {
        const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        v = lo + u * (hi - lo);
    }
    return out;
}

/// Independent oracle for sensitivities: re-solve after nudging one sample.
inline double fd_sensitivity(const PsiSpec& psi, std::vector<double> data, std::size_t index,
                             double step = 1e-6) {
    data[index] += step;
    const double up = solve(psi, data).value;
    data[index] -= 2.0 * step;
    const double down = solve(psi, data).value;
    return (up - down) / (2.0 * step);
}

inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

inline bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace airob::testing
