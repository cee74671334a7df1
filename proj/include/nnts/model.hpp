#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "nnts/angles.hpp"

namespace nnts {

using Complex = std::complex<double>;

namespace detail {
/// Rotates a coefficient vector so its gauge anchor (c_0, or the first entry
/// with modulus above 1e-14) becomes real and nonnegative. Bitwise no-op when
/// it already is.
void fix_gauge(std::vector<Complex>& values);
}  // namespace detail

/// Coefficient vector c_0..c_M on the complex unit hypersphere, stored with
/// the global phase fixed so that c_0 is real and nonnegative (when c_0 is
/// numerically zero the first coefficient with modulus above 1e-14 anchors
/// the gauge instead). The squared moduli sum to one; this is what makes the
/// associated trigonometric sum a density.
class Coefficients {
 public:
  /// Validates the unit-norm constraint (within 1e-12) and fixes the gauge.
  explicit Coefficients(std::vector<Complex> values);

  /// Scales an arbitrary nonzero vector onto the sphere, then fixes the gauge.
  static Coefficients from_unnormalized(std::vector<Complex> values);

  const std::vector<Complex>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  Complex operator[](std::size_t k) const { return values_[k]; }
  std::vector<double> moduli() const;

 private:
  struct unchecked_t {};
  Coefficients(std::vector<Complex> values, unchecked_t) : values_(std::move(values)) {}
  std::vector<Complex> values_;

  friend class NntsModel;
};

/// Circular density built from a nonnegative trigonometric sum: the squared
/// modulus of a degree-M complex trigonometric polynomial, divided by 2*pi.
class NntsModel {
 public:
  explicit NntsModel(Coefficients coeffs) : coeffs_(std::move(coeffs)) {}

  /// The M=0 model, i.e. the circular uniform density.
  static NntsModel uniform();

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Coefficients& coeffs() const { return coeffs_; }

 private:
  Coefficients coeffs_;
};

/// Reflective-symmetric member of the family: real coefficients rho_0..rho_M
/// on the real unit hypersphere together with a symmetry axis mu. The induced
/// general coefficients are c_k = rho_k * exp(-i*k*mu).
class SymmetricNntsModel {
 public:
  /// Validates the unit norm (within 1e-12), wraps mu into [0, 2*pi), and
  /// flips the overall sign so the first nonzero rho entry is positive.
  SymmetricNntsModel(std::vector<double> rho, double mu);

  static SymmetricNntsModel uniform();

  int degree() const { return static_cast<int>(rho_.size()) - 1; }
  const std::vector<double>& rho() const { return rho_; }
  double mu() const { return mu_; }

  NntsModel to_general() const;

  /// Resolves the mu vs mu+pi ambiguity (which flips the sign of every odd
  /// rho entry): of the two equivalent representations, prefer the one whose
  /// first nonzero rho is positive without a global sign flip; on ties take
  /// the smaller axis angle.
  SymmetricNntsModel canonical_axis() const;

 private:
  std::vector<double> rho_;
  double mu_;
};

/// Density at theta: |sum_k c_k e^{ik*theta}|^2 / (2*pi), evaluated as the
/// squared modulus of the inner sum so nonnegativity is structural.
double density(const NntsModel& model, double theta);
double density(const SymmetricNntsModel& model, double theta);

/// Distribution function on [0, 2*pi], by term-wise integration of the
/// coefficient autocorrelation. Throws std::domain_error outside [0, 2*pi].
double cdf(const NntsModel& model, double theta);

/// p-th trigonometric moment E[e^{ip*theta}] = sum_{k=0}^{M-p} c_k conj(c_{k+p});
/// exactly zero for p > M. Requires p >= 1.
Complex trig_moment(const NntsModel& model, int p);

/// Symmetric model with rho_k = |c_k| and the given axis.
SymmetricNntsModel symmetrize_coeffs(const Coefficients& coeffs, double mu);

/// Canonical spectral factor: the coefficient vector is identified only up to
/// reflecting roots of sum_k c_k z^k across the unit circle (every choice
/// yields the same density). This returns the representative with all roots
/// inside the closed unit disk, making moduli well-defined and rotation
/// equivariant. Falls back to the input when root-finding fails to converge.
Coefficients minimum_phase(const Coefficients& coeffs);

/// Axis of reflective symmetry, if one exists: mu such that Arg(c_k) = -k*mu
/// (mod 2*pi) for every coefficient with |c_k| > tol. The estimate minimizes
/// the modulus-weighted squared angular misfit of the phases over a 4096-point
/// grid with local refinement; the model is declared symmetric only when the
/// reflection error max_theta |f(theta) - f(2*mu - theta)| over a 1024-point
/// grid stays below tol. Returns the canonical axis representative.
std::optional<double> reflective_symmetry_axis(const NntsModel& model, double tol);

/// Sum of log densities over the sample. Returns -infinity when the density
/// underflows below 1e-300 at any observation.
double log_likelihood(const NntsModel& model, const AngleSample& data);
double log_likelihood(const SymmetricNntsModel& model, const AngleSample& data);

}  // namespace nnts
