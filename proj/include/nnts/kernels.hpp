#pragma once

#include <complex>
#include <span>
#include <vector>

namespace nnts::kernels {

using Complex = std::complex<double>;

/// Unit phases z_j = exp(i*theta_j), computed once per dataset.
std::vector<Complex> unit_phases(std::span<const double> angles);

/// Inner sum a(theta) = sum_k c_k z^k via Horner on the unit phase z.
Complex inner_sum(std::span<const Complex> coeffs, Complex z);

/// Sum over observations of log(|a(theta_j)|^2 / (2*pi)). Returns -infinity
/// when the density underflows below 1e-300 at any observation.
///
/// The parallel version sums fixed-size blocks independently and combines the
/// partials in block order, so the result is bitwise independent of the
/// number of OpenMP threads. The serial version is the plain reference loop
/// kept for testing and benchmarking; the two may differ by rounding only.
double loglik_serial(std::span<const Complex> coeffs, std::span<const Complex> phases);
double loglik(std::span<const Complex> coeffs, std::span<const Complex> phases);

/// Score vector of the sphere-constrained likelihood:
/// g_k = sum_j conj(z_j)^k / conj(a(theta_j)). At a stationary point on the
/// sphere g = n*c. Same blocked-combination guarantee as loglik().
void score_serial(std::span<const Complex> coeffs, std::span<const Complex> phases,
                  std::span<Complex> out);
void score(std::span<const Complex> coeffs, std::span<const Complex> phases,
           std::span<Complex> out);

/// Density evaluated at each grid angle (embarrassingly parallel).
void density_grid(std::span<const Complex> coeffs, std::span<const double> thetas,
                  std::span<double> out);

/// Fixed block length used by the deterministic parallel reductions.
inline constexpr std::size_t kBlock = 1024;

}  // namespace nnts::kernels
