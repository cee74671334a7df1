#include "nnts/kernels.hpp"

#include <cmath>
#include <limits>

#include "nnts/angles.hpp"

namespace nnts::kernels {

namespace {
constexpr double kInv2Pi = 1.0 / kTwoPi;
constexpr double kUnderflow = 1e-300;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

std::vector<Complex> unit_phases(std::span<const double> angles) {
  std::vector<Complex> z(angles.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(angles.size()); ++j)
    z[j] = Complex(std::cos(angles[j]), std::sin(angles[j]));
  return z;
}

Complex inner_sum(std::span<const Complex> coeffs, Complex z) {
  const std::size_t m = coeffs.size() - 1;
  Complex a = coeffs[m];
  for (std::size_t k = m; k-- > 0;) a = a * z + coeffs[k];
  return a;
}

namespace {

double loglik_block(std::span<const Complex> coeffs, std::span<const Complex> phases,
                    std::size_t lo, std::size_t hi) {
  double s = 0.0;
  for (std::size_t j = lo; j < hi; ++j) {
    const double d = std::norm(inner_sum(coeffs, phases[j])) * kInv2Pi;
    if (d < kUnderflow) return kNegInf;
    s += std::log(d);
  }
  return s;
}

void score_block(std::span<const Complex> coeffs, std::span<const Complex> phases,
                 std::size_t lo, std::size_t hi, Complex* acc) {
  const std::size_t m = coeffs.size() - 1;
  for (std::size_t j = lo; j < hi; ++j) {
    const Complex zb = conj(phases[j]);
    Complex w = 1.0 / conj(inner_sum(coeffs, phases[j]));
    acc[0] += w;
    for (std::size_t k = 1; k <= m; ++k) {
      w *= zb;
      acc[k] += w;
    }
  }
}

}  // namespace

double loglik_serial(std::span<const Complex> coeffs, std::span<const Complex> phases) {
  return loglik_block(coeffs, phases, 0, phases.size());
}

double loglik(std::span<const Complex> coeffs, std::span<const Complex> phases) {
  const std::size_t n = phases.size();
  if (n <= kBlock) return loglik_block(coeffs, phases, 0, n);
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    partial[b] = loglik_block(coeffs, phases, lo, std::min(lo + kBlock, n));
  }
  // fixed combination order: result does not depend on the thread count
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void score_serial(std::span<const Complex> coeffs, std::span<const Complex> phases,
                  std::span<Complex> out) {
  for (auto& g : out) g = Complex(0.0, 0.0);
  score_block(coeffs, phases, 0, phases.size(), out.data());
}

void score(std::span<const Complex> coeffs, std::span<const Complex> phases,
           std::span<Complex> out) {
  const std::size_t n = phases.size();
  const std::size_t width = coeffs.size();
  for (auto& g : out) g = Complex(0.0, 0.0);
  if (n <= kBlock) {
    score_block(coeffs, phases, 0, n, out.data());
    return;
  }
  const std::size_t nblocks = (n + kBlock - 1) / kBlock;
  std::vector<Complex> partial(nblocks * width, Complex(0.0, 0.0));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nblocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    score_block(coeffs, phases, lo, std::min(lo + kBlock, n), partial.data() + b * width);
  }
  for (std::size_t b = 0; b < nblocks; ++b)
    for (std::size_t k = 0; k < width; ++k) out[k] += partial[b * width + k];
}

void density_grid(std::span<const Complex> coeffs, std::span<const double> thetas,
                  std::span<double> out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(thetas.size()); ++i) {
    const Complex z(std::cos(thetas[i]), std::sin(thetas[i]));
    out[i] = std::norm(inner_sum(coeffs, z)) * kInv2Pi;
  }
}

}  // namespace nnts::kernels
