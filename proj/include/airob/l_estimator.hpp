#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "airob/norm.hpp"
#include "airob/report.hpp"

namespace airob {

enum class WeightSource { explicit_weights, from_h, alpha_trimmed, median };

/// Order-statistic coefficients a_n of an L-estimator sum a_n x_(n).
struct LWeights {
    std::vector<double> a;
    WeightSource source = WeightSource::explicit_weights;
    double alpha = 0.0;  ///< only meaningful for alpha_trimmed
};

/// a_n proportional to the integral of h over ((n-1)/N, n/N), normalized by
/// the integral of h over (0, 1). Point masses in h are not representable
/// by quadrature; the median weights below cover the one named case.
LWeights weights_from_h(const std::function<double(double)>& h, std::size_t n);

LWeights mean_weights(std::size_t n);
LWeights median_weights(std::size_t n);
LWeights alpha_trimmed_weights(double alpha, std::size_t n);
LWeights explicit_weights(std::vector<double> a);

/// Single-column CSV, one weight per line (optional header tolerated).
LWeights weights_from_csv(const std::string& path);
void weights_to_csv(const LWeights& w, const std::string& path);

/// sum a_n x_(n) over the ascending (stable) ordering of data.
double l_estimate(const LWeights& w, std::span<const double> data);

/// AIF of the L-estimator; depends only on the weights. Valid for budgets
/// below the ordering-safety threshold, where no feasible perturbation can
/// reorder the sample.
AifReport l_aif(const LWeights& w, NormOrder p);

struct OrderingThreshold {
    double eta_star = 0.0;
    bool all_equal = false;
};

/// Largest eta with N^{1/p} eta <= min-gap / 2, so every feasible
/// perturbation preserves the sort order of the data.
OrderingThreshold ordering_safety_threshold(std::span<const double> data, NormOrder p);

}  // namespace airob
