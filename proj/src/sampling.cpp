#include "nnts/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nnts/kernels.hpp"

namespace nnts {

double bessel_i0(double x) {
  if (x < 0.0) throw std::invalid_argument("bessel_i0: x must be >= 0");
  // All terms positive, so no cancellation; ~80 terms suffice at x = 50.
  const double q = 0.25 * x * x;
  double term = 1.0, sum = 1.0;
  for (int m = 1; m < 1000; ++m) {
    term *= q / (static_cast<double>(m) * m);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

KSineModel::KSineModel(double mu, double lambda, int k_star, VonMisesBase base)
    : mu_(wrap_angle(mu)), lambda_(lambda), k_star_(k_star), base_(base) {
  if (!(std::fabs(lambda) <= 1.0))
    throw std::invalid_argument("KSineModel: |lambda| must be <= 1 for a nonnegative density");
  if (k_star < 1) throw std::invalid_argument("KSineModel: k_star must be >= 1");
  if (!(base.kappa >= 0.0)) throw std::invalid_argument("KSineModel: kappa must be >= 0");
}

double ksine_density(const KSineModel& model, double theta) {
  const double w = theta - model.mu();
  const double f0 = std::exp(model.base().kappa * std::cos(w)) /
                    (kTwoPi * bessel_i0(model.base().kappa));
  return f0 * (1.0 + model.lambda() * std::sin(model.k_star() * w));
}

namespace {

// Uniform-proposal rejection loop under a constant envelope. Throws if the
// envelope is ever violated.
template <typename Density>
AngleSample rejection_sample(const Density& f, double envelope, std::size_t n, RngStream& rng,
                             SampleStats* stats) {
  if (n < 1) throw std::invalid_argument("sampler: n must be >= 1");
  std::vector<double> out;
  out.reserve(n);
  std::size_t proposals = 0;
  const double guard = envelope * (1.0 + 1e-12);
  while (out.size() < n) {
    const double theta = rng.uniform() * kTwoPi;
    const double u = rng.uniform();
    const double fv = f(theta);
    ++proposals;
    if (fv > guard) throw std::logic_error("sampler: density exceeds its envelope");
    if (u * envelope < fv) out.push_back(theta);
  }
  if (stats) stats->proposals = proposals;
  return AngleSample(std::move(out));
}

double coeff_abs_sum(const Coefficients& coeffs) {
  double s = 0.0;
  for (const auto& c : coeffs.values()) s += std::abs(c);
  return s;
}

}  // namespace

AngleSample sample_nnts(const NntsModel& model, std::size_t n, RngStream rng,
                        SampleStats* stats) {
  const double s = coeff_abs_sum(model.coeffs());
  const double envelope = s * s / kTwoPi;  // |a(theta)|^2 <= (sum |c_k|)^2
  const auto& c = model.coeffs().values();
  return rejection_sample(
      [&](double theta) {
        return std::norm(kernels::inner_sum(c, std::polar(1.0, theta))) / kTwoPi;
      },
      envelope, n, rng, stats);
}

AngleSample sample_nnts(const SymmetricNntsModel& model, std::size_t n, RngStream rng,
                        SampleStats* stats) {
  // Draw in the centered frame, then shift by the axis: the draw sequence
  // depends only on rho, so rotating the model rotates the sample.
  const auto& rho = model.rho();
  double s = 0.0;
  for (double r : rho) s += std::fabs(r);
  const double envelope = s * s / kTwoPi;
  const int m = model.degree();
  AngleSample centered = rejection_sample(
      [&](double psi) {
        const Complex z = std::polar(1.0, psi);
        Complex a(rho[m], 0.0);
        for (int k = m - 1; k >= 0; --k) a = a * z + rho[k];
        return std::norm(a) / kTwoPi;
      },
      envelope, n, rng, stats);
  std::vector<double> shifted = centered.angles();
  for (auto& t : shifted) t = wrap_angle(t + model.mu());
  return AngleSample(std::move(shifted));
}

AngleSample sample_ksine(const KSineModel& model, std::size_t n, RngStream rng,
                         SampleStats* stats) {
  const double f0_max = std::exp(model.base().kappa) / (kTwoPi * bessel_i0(model.base().kappa));
  const double envelope = (1.0 + std::fabs(model.lambda())) * f0_max;
  return rejection_sample([&](double theta) { return ksine_density(model, theta); }, envelope, n,
                          rng, stats);
}

}  // namespace nnts
