#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace nnts {

/// Complementary CDF of the Kolmogorov distribution,
/// Q(t) = 2 * sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2).
double kolmogorov_sf(double t);

struct KsResult {
  double statistic = 0.0;  // sup |F_n - F|
  double p_value = 1.0;    // asymptotic, with the Stephens small-n correction
  std::size_t n = 0;
};

/// One-sample two-sided KS test against U[0,1]. Values are copied and sorted.
KsResult ks_uniform01(std::vector<double> values);

/// One-sample KS test against an arbitrary continuous CDF, by the probability
/// integral transform.
KsResult ks_test(const std::vector<double>& samples, const std::function<double(double)>& cdf);

}  // namespace nnts
