#include "nnts/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nnts/kernels.hpp"

namespace nnts {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kGaugeFloor = 1e-14;

double squared_norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s;
}

}  // namespace

namespace detail {

void fix_gauge(std::vector<Complex>& v) {
  std::size_t anchor = 0;
  while (anchor < v.size() && std::abs(v[anchor]) < kGaugeFloor) ++anchor;
  if (anchor == v.size()) return;  // numerically zero vector; caller rejects
  if (v[anchor].imag() == 0.0 && v[anchor].real() >= 0.0) return;
  const double mod = std::abs(v[anchor]);
  const Complex phase = conj(v[anchor] / mod);
  for (auto& c : v) c *= phase;
  v[anchor] = Complex(mod, 0.0);
}

}  // namespace detail

AngleSample::AngleSample(std::vector<double> angles_rad, SourceUnit unit, std::string source)
    : angles_(std::move(angles_rad)), unit_(unit), source_(std::move(source)) {
  if (angles_.empty()) throw std::invalid_argument("AngleSample: need at least one angle");
  for (auto& a : angles_) {
    if (!std::isfinite(a)) throw std::invalid_argument("AngleSample: non-finite angle");
    a = wrap_angle(a);
  }
}

Coefficients::Coefficients(std::vector<Complex> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("Coefficients: empty vector");
  for (const auto& c : values_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::invalid_argument("Coefficients: non-finite entry");
  const double sq = squared_norm(values_);
  if (std::abs(sq - 1.0) > kNormTol)
    throw std::invalid_argument("Coefficients: squared moduli must sum to 1 (got " +
                                std::to_string(sq) + ")");
  detail::fix_gauge(values_);
}

Coefficients Coefficients::from_unnormalized(std::vector<Complex> values) {
  if (values.empty()) throw std::invalid_argument("Coefficients: empty vector");
  const double sq = squared_norm(values);
  if (!(sq > 0.0) || !std::isfinite(sq))
    throw std::invalid_argument("Coefficients: cannot normalize zero or non-finite vector");
  const double inv = 1.0 / std::sqrt(sq);
  for (auto& c : values) c *= inv;
  detail::fix_gauge(values);
  return Coefficients(std::move(values), unchecked_t{});
}

std::vector<double> Coefficients::moduli() const {
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(),
                 [](const Complex& c) { return std::abs(c); });
  return out;
}

NntsModel NntsModel::uniform() { return NntsModel(Coefficients({Complex(1.0, 0.0)})); }

SymmetricNntsModel::SymmetricNntsModel(std::vector<double> rho, double mu)
    : rho_(std::move(rho)), mu_(wrap_angle(mu)) {
  if (rho_.empty()) throw std::invalid_argument("SymmetricNntsModel: empty rho");
  double sq = 0.0;
  for (double r : rho_) {
    if (!std::isfinite(r)) throw std::invalid_argument("SymmetricNntsModel: non-finite rho");
    sq += r * r;
  }
  if (std::abs(sq - 1.0) > kNormTol)
    throw std::invalid_argument("SymmetricNntsModel: squared rho must sum to 1 (got " +
                                std::to_string(sq) + ")");
  if (!std::isfinite(mu_)) throw std::invalid_argument("SymmetricNntsModel: non-finite mu");
  for (double r : rho_) {
    if (r == 0.0) continue;
    if (r < 0.0)
      for (auto& x : rho_) x = -x;
    break;
  }
}

SymmetricNntsModel SymmetricNntsModel::uniform() { return SymmetricNntsModel({1.0}, 0.0); }

NntsModel SymmetricNntsModel::to_general() const {
  std::vector<Complex> c(rho_.size());
  c[0] = Complex(rho_[0], 0.0);
  const Complex step = std::polar(1.0, -mu_);
  Complex ph(1.0, 0.0);
  for (std::size_t k = 1; k < rho_.size(); ++k) {
    ph *= step;
    c[k] = rho_[k] * ph;
  }
  return NntsModel(Coefficients(std::move(c)));
}

SymmetricNntsModel SymmetricNntsModel::canonical_axis() const {
  std::vector<double> alt(rho_.size());
  for (std::size_t k = 0; k < rho_.size(); ++k) alt[k] = (k % 2 == 0) ? rho_[k] : -rho_[k];
  const double mu_alt = wrap_angle(mu_ + kTwoPi / 2.0);

  std::size_t first = 0;
  while (first < rho_.size() && rho_[first] == 0.0) ++first;
  if (first >= rho_.size()) return *this;

  if (first % 2 == 1) {
    // The alternating flip changes this entry's sign; exactly one axis keeps
    // the stored (positive) leading entry.
    return *this;
  }
  // Leading entry shared by both representations: take the smaller axis.
  if (mu_alt < mu_) return SymmetricNntsModel(std::move(alt), mu_alt);
  return *this;
}

double density(const NntsModel& model, double theta) {
  const Complex z = std::polar(1.0, theta);
  const Complex a = kernels::inner_sum(model.coeffs().values(), z);
  return std::norm(a) / kTwoPi;
}

double density(const SymmetricNntsModel& model, double theta) {
  // Evaluate in the centered frame; same value as the induced general model.
  const Complex z = std::polar(1.0, theta - model.mu());
  const auto& rho = model.rho();
  const int m = model.degree();
  Complex a(rho[m], 0.0);
  for (int k = m - 1; k >= 0; --k) a = a * z + rho[k];
  return std::norm(a) / kTwoPi;
}

double cdf(const NntsModel& model, double theta) {
  if (!(theta >= 0.0 && theta <= kTwoPi))
    throw std::domain_error("cdf: theta must lie in [0, 2*pi]");
  const auto& c = model.coeffs().values();
  const int m = model.degree();
  double out = theta / kTwoPi;
  for (int p = 1; p <= m; ++p) {
    Complex ap(0.0, 0.0);  // autocorrelation sum_k c_{k+p} conj(c_k)
    for (int k = 0; k + p <= m; ++k) ap += c[k + p] * conj(c[k]);
    const Complex e = std::polar(1.0, p * theta) - 1.0;
    out += (ap * e / Complex(0.0, static_cast<double>(p))).real() / (kTwoPi / 2.0);
  }
  return out;
}

Complex trig_moment(const NntsModel& model, int p) {
  if (p < 1) throw std::invalid_argument("trig_moment: p must be >= 1");
  const auto& c = model.coeffs().values();
  const int m = model.degree();
  if (p > m) return Complex(0.0, 0.0);
  Complex s(0.0, 0.0);
  for (int k = 0; k + p <= m; ++k) s += c[k] * conj(c[k + p]);
  return s;
}

SymmetricNntsModel symmetrize_coeffs(const Coefficients& coeffs, double mu) {
  return SymmetricNntsModel(coeffs.moduli(), mu);
}

namespace {

// Weighted squared angular misfit of the coefficient phases to -k*mu.
double phase_misfit(const std::vector<Complex>& c, double floor, double mu) {
  double s = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double w = std::norm(c[k]);
    if (std::sqrt(w) <= floor) continue;
    double d = std::arg(c[k]) + static_cast<double>(k) * mu;
    d = std::remainder(d, kTwoPi);
    s += w * d * d;
  }
  return s;
}

double reflection_error(const NntsModel& model, double mu, int grid) {
  double worst = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double t = kTwoPi * i / grid;
    worst = std::max(worst, std::abs(density(model, t) - density(model, 2.0 * mu - t)));
  }
  return worst;
}

}  // namespace

std::optional<double> reflective_symmetry_axis(const NntsModel& model, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("reflective_symmetry_axis: tol must be > 0");
  const auto& c = model.coeffs().values();

  bool any_phase = false;
  for (std::size_t k = 1; k < c.size(); ++k)
    if (std::abs(c[k]) > tol) any_phase = true;

  double mu = 0.0;
  if (any_phase) {
    constexpr int kGrid = 4096;
    double best = phase_misfit(c, tol, 0.0);
    int best_i = 0;
    for (int i = 1; i < kGrid; ++i) {
      const double v = phase_misfit(c, tol, kTwoPi * i / kGrid);
      if (v < best) {
        best = v;
        best_i = i;
      }
    }
    // golden-section refinement inside the bracketing grid cells
    const double gr = 0.6180339887498949;
    double lo = kTwoPi * (best_i - 1) / kGrid, hi = kTwoPi * (best_i + 1) / kGrid;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = phase_misfit(c, tol, x1), f2 = phase_misfit(c, tol, x2);
    while (hi - lo > 1e-12) {
      if (f1 > f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = phase_misfit(c, tol, x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = phase_misfit(c, tol, x1);
      }
    }
    mu = wrap_angle(0.5 * (lo + hi));
  }

  if (reflection_error(model, mu, 1024) >= tol) return std::nullopt;

  // signed rho representation at the detected axis, then the canonical rule
  std::vector<double> rho(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double re = (c[k] * std::polar(1.0, static_cast<double>(k) * mu)).real();
    rho[k] = (re < 0.0) ? -std::abs(c[k]) : std::abs(c[k]);
  }
  return SymmetricNntsModel(std::move(rho), mu).canonical_axis().mu();
}

double log_likelihood(const NntsModel& model, const AngleSample& data) {
  const auto phases = kernels::unit_phases(data.angles());
  return kernels::loglik(model.coeffs().values(), phases);
}

double log_likelihood(const SymmetricNntsModel& model, const AngleSample& data) {
  // Centered-frame evaluation: real coefficients against translated angles.
  // Deliberately a different route than to_general() so the two can be
  // cross-checked.
  std::vector<double> shifted(data.size());
  const auto& th = data.angles();
  for (std::size_t j = 0; j < th.size(); ++j) shifted[j] = th[j] - model.mu();
  const auto phases = kernels::unit_phases(shifted);
  std::vector<Complex> c(model.rho().size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = Complex(model.rho()[k], 0.0);
  return kernels::loglik(c, phases);
}

}  // namespace nnts
