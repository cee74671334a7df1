#pragma once

#include <cstddef>

#include "nnts/angles.hpp"
#include "nnts/model.hpp"
#include "nnts/rng.hpp"

namespace nnts {

/// Modified Bessel function of the first kind, order zero (the von Mises
/// normalizing constant). Power series of positive terms; relative error
/// below 1e-12 for x <= 50.
double bessel_i0(double x);

struct VonMisesBase {
  double kappa = 1.0;
};

/// Sine-perturbed symmetric density f_0(theta - mu) * [1 + lambda*sin(k*(theta - mu))]
/// with a von Mises base; |lambda| <= 1 keeps it nonnegative, lambda = 0
/// recovers the base.
class KSineModel {
 public:
  KSineModel(double mu, double lambda, int k_star, VonMisesBase base);

  double mu() const { return mu_; }
  double lambda() const { return lambda_; }
  int k_star() const { return k_star_; }
  const VonMisesBase& base() const { return base_; }

 private:
  double mu_;
  double lambda_;
  int k_star_;
  VonMisesBase base_;
};

double ksine_density(const KSineModel& model, double theta);

/// Proposal/acceptance counters from a rejection-sampling run.
struct SampleStats {
  std::size_t proposals = 0;
};

/// Exact draws by rejection sampling with uniform proposals under the
/// constant envelope (sum_k |c_k|)^2 / (2*pi). Every proposal asserts
/// f(theta) <= envelope; a violation is a hard failure.
AngleSample sample_nnts(const NntsModel& model, std::size_t n, RngStream rng,
                        SampleStats* stats = nullptr);

/// Symmetric models are sampled in the centered frame (axis at zero) and then
/// shifted by mu, so the draw sequence depends on rho only.
AngleSample sample_nnts(const SymmetricNntsModel& model, std::size_t n, RngStream rng,
                        SampleStats* stats = nullptr);

/// Exact k-sine draws; envelope (1 + |lambda|) * max f_0.
AngleSample sample_ksine(const KSineModel& model, std::size_t n, RngStream rng,
                         SampleStats* stats = nullptr);

}  // namespace nnts
