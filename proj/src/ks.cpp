#include "nnts/ks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nnts {

double kolmogorov_sf(double t) {
  if (t <= 0.0) return 1.0;
  if (t < 1.18) {
    // theta-function form, fast for small t
    const double y = std::exp(-1.2337005501361697 / (t * t));  // pi^2/8
    const double cdf = 2.5066282746310002 / t * (y + std::pow(y, 9) + std::pow(y, 25) +
                                                 std::pow(y, 49));
    return 1.0 - cdf;
  }
  const double v = std::exp(-2.0 * t * t);
  return 2.0 * (v - std::pow(v, 4) + std::pow(v, 9) - std::pow(v, 16) + std::pow(v, 25));
}

KsResult ks_uniform01(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("ks_uniform01: empty sample");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double u = values[i];
    d = std::max(d, std::max((i + 1) / n - u, u - i / n));
  }
  const double sn = std::sqrt(n);
  // Stephens' finite-n adjustment of the asymptotic distribution
  const double t = d * (sn + 0.12 + 0.11 / sn);
  return KsResult{d, kolmogorov_sf(t), values.size()};
}

KsResult ks_test(const std::vector<double>& samples, const std::function<double(double)>& cdf) {
  std::vector<double> u(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) u[i] = cdf(samples[i]);
  return ks_uniform01(std::move(u));
}

}  // namespace nnts
