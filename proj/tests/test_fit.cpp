#include <doctest.h>

#include <cmath>

#include "nnts/fit.hpp"
#include "nnts/kernels.hpp"
#include "nnts/sampling.hpp"
#include "oracles.hpp"

using namespace nnts;

namespace {

// Deterministic cardioid data through the quantile function of
// (1 + cos t)/(2*pi): solves (t + sin t)/(2*pi) = q by bisection.
std::vector<double> cardioid_quantile_data(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = (i + 0.5) / n;
    double lo = 0.0, hi = kTwoPi;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((mid + std::sin(mid)) / kTwoPi < q ? lo : hi) = mid;
    }
    out[i] = 0.5 * (lo + hi);
  }
  return out;
}

double max_rho_gap(const SymmetricNntsModel& fitted, const SymmetricNntsModel& truth) {
  // distance up to the (rho_k -> (-1)^k rho_k, mu -> mu + pi) equivalence and
  // the global sign; both sides are compared through their canonical forms
  const SymmetricNntsModel a = fitted.canonical_axis();
  const SymmetricNntsModel b = truth.canonical_axis();
  double direct = 0.0;
  for (std::size_t k = 0; k < a.rho().size(); ++k)
    direct = std::max(direct, std::fabs(a.rho()[k] - b.rho()[k]));
  return direct;
}

}  // namespace

TEST_CASE("M = 0 fit reproduces the uniform baseline rows") {
  RngStream rng(31);
  std::vector<double> angles(100);
  for (auto& t : angles) t = rng.uniform(0.0, kTwoPi);
  const FitReport rep = fit_general(AngleSample(angles), 0);
  CHECK(rep.loglik == doctest::Approx(-183.78770664093453).epsilon(1e-12));
  CHECK(rep.n_params == 0);
  CHECK(rep.converged);
  CHECK(std::round(rep.aic * 100.0) / 100.0 == doctest::Approx(367.58));
  CHECK(std::round(rep.bic * 100.0) / 100.0 == doctest::Approx(367.58));
}

TEST_CASE("M = 1 fit tracks the sample mean direction and nests the uniform") {
  const AngleSample data(cardioid_quantile_data(2000));
  const FitReport rep = fit_general(data, 1);
  REQUIRE(rep.general());

  Complex sample_m1(0.0, 0.0);
  for (double t : data.angles()) sample_m1 += std::polar(1.0, t);
  sample_m1 /= static_cast<double>(data.size());

  const Complex fitted_m1 = trig_moment(*rep.general(), 1);
  CHECK(std::abs(fitted_m1 - sample_m1) < 0.05);

  const double uniform_ll = -static_cast<double>(data.size()) * std::log(kTwoPi);
  CHECK(rep.loglik >= uniform_ll);
}

TEST_CASE("general fit recovers a known M = 2 model from 5000 draws") {
  RngStream rng(32);
  const NntsModel truth = oracle::random_model(2, rng);
  const AngleSample data = sample_nnts(truth, 5000, RngStream(7001));
  const FitReport rep = fit_general(data, 2);
  REQUIRE(rep.general());
  const auto fitted = rep.general()->coeffs().moduli();
  const auto expected = truth.coeffs().moduli();
  for (std::size_t k = 0; k < expected.size(); ++k)
    CHECK(std::fabs(fitted[k] - expected[k]) < 0.05);
}

TEST_CASE("accepted log-likelihood sequence is nondecreasing") {
  RngStream rng(33);
  const NntsModel truth = oracle::random_model(3, rng);
  const AngleSample data = sample_nnts(truth, 300, RngStream(7002));

  std::vector<double> trace;
  FitOptions opts;
  opts.trace = &trace;
  fit_general(data, 3, opts);
  REQUIRE(trace.size() > 1);
  double prev = -std::numeric_limits<double>::infinity();
  bool restarted_ok = true;
  double start = trace.front();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (i > 0 && trace[i] < prev) {
      // a drop can only be the start of a new restart
      restarted_ok = restarted_ok && (trace[i] <= start + 1e-9);
      start = trace[i];
    }
    prev = trace[i];
  }
  CHECK(restarted_ok);

  // within a single-start fit the trace is strictly monotone
  trace.clear();
  opts.n_restarts = 1;
  fit_general(data, 3, opts);
  for (std::size_t i = 1; i < trace.size(); ++i) REQUIRE(trace[i] >= trace[i - 1]);
}

TEST_CASE("converged-by-gradient fits are stationary points") {
  RngStream rng(34);
  const NntsModel truth = oracle::random_model(2, rng);
  const AngleSample data = sample_nnts(truth, 400, RngStream(7003));
  FitOptions opts;
  opts.grad_tol = 1e-9;
  const FitReport rep = fit_general(data, 2, opts);
  if (rep.converged && rep.grad_norm < opts.grad_tol) {
    const auto phases = kernels::unit_phases(data.angles());
    std::vector<Complex> g(3);
    kernels::score(rep.general()->coeffs().values(), phases, g);
    double gn = 0.0;
    for (int k = 0; k <= 2; ++k)
      gn += std::norm(g[k] / static_cast<double>(data.size()) -
                      rep.general()->coeffs()[k]);
    CHECK(std::sqrt(gn) < opts.grad_tol * 1.01);
  }
}

TEST_CASE("symmetric M = 1 fit matches the general fit") {
  const AngleSample data(cardioid_quantile_data(500));
  const FitPair fits = fit_both(data, 1);
  CHECK(std::fabs(fits.symmetric.loglik - fits.general.loglik) < 1e-6);
  CHECK(fits.symmetric.n_params == 2);
  CHECK(fits.general.n_params == 2);
}

TEST_CASE("symmetric fit finds the axis of reflected data") {
  RngStream rng(35);
  const NntsModel base = oracle::random_model(2, rng);
  const AngleSample half = sample_nnts(base, 1000, RngStream(7004));
  std::vector<double> both;
  for (double t : half.angles()) {
    both.push_back(t);
    both.push_back(wrap_angle(2.0 * 2.0 - t));  // reflect about mu* = 2.0
  }
  const FitReport rep = fit_symmetric(AngleSample(both), 2);
  REQUIRE(rep.symmetric());
  const double mu = rep.symmetric()->mu();
  const double d1 = std::fabs(std::remainder(mu - 2.0, kTwoPi));
  const double d2 = std::fabs(std::remainder(mu - 2.0 - kTwoPi / 2, kTwoPi));
  CHECK(std::min(d1, d2) < 0.05);
}

TEST_CASE("symmetric fit recovers a known M = 3 symmetric model") {
  RngStream rng(36);
  const SymmetricNntsModel truth = oracle::random_symmetric_model(3, rng);
  const AngleSample data = sample_nnts(truth, 5000, RngStream(7005));
  const FitReport rep = fit_symmetric(data, 3);
  REQUIRE(rep.symmetric());
  CHECK(max_rho_gap(*rep.symmetric(), truth) < 0.05);
}

TEST_CASE("scan: single uniform entry at m_max = 0") {
  RngStream rng(37);
  std::vector<double> angles(50);
  for (auto& t : angles) t = rng.uniform(0.0, kTwoPi);
  const auto entries = scan_models(AngleSample(angles), 0, Family::general);
  REQUIRE(entries.size() == 1);
  REQUIRE(entries[0].report.has_value());
  CHECK(entries[0].best_aic);
  CHECK(entries[0].best_bic);
}

TEST_CASE("scan: BIC identifies a symmetric M = 2 generator, likelihoods nest") {
  RngStream rng(38);
  const SymmetricNntsModel truth = oracle::random_symmetric_model(2, rng);
  const AngleSample data = sample_nnts(truth, 1000, RngStream(7006));

  const auto sym = scan_models(data, 5, Family::symmetric);
  int best_bic = -1;
  for (int m = 0; m <= 5; ++m)
    if (sym[m].best_bic) best_bic = m;
  CHECK(best_bic >= 2);
  CHECK(best_bic <= 3);

  const auto both = scan_both(data, 5);
  double prev = -std::numeric_limits<double>::infinity();
  for (int m = 0; m <= 5; ++m) {
    REQUIRE(both[m].fits.has_value());
    const auto& f = *both[m].fits;
    CHECK(f.general.loglik >= prev - 1e-6);  // nesting in M
    CHECK(f.symmetric.loglik <= f.general.loglik + 1e-6);
    prev = f.general.loglik;
  }
}

TEST_CASE("fitted moduli are invariant under data rotation") {
  RngStream rng(39);
  const NntsModel truth = oracle::random_model(3, rng);
  const AngleSample data = sample_nnts(truth, 500, RngStream(7007));
  const auto base = fit_general(data, 3).general()->coeffs().moduli();

  for (int trial = 0; trial < 20; ++trial) {
    const double delta = rng.uniform(0.0, kTwoPi);
    std::vector<double> rotated = data.angles();
    for (auto& t : rotated) t = wrap_angle(t + delta);
    const auto moduli = fit_general(AngleSample(rotated), 3).general()->coeffs().moduli();
    for (std::size_t k = 0; k < base.size(); ++k)
      REQUIRE(std::fabs(moduli[k] - base[k]) < 1e-4);
  }
}

TEST_CASE("degenerate data still produces a report") {
  const AngleSample data(std::vector<double>(50, 1.0));
  const FitReport rep = fit_general(data, 2);
  CHECK(std::isfinite(rep.loglik));
  // the point-mass ceiling for the density is (M+1)/(2*pi)
  CHECK(rep.loglik <= 50.0 * std::log(3.0 / kTwoPi) + 1e-9);
  const FitReport sym = fit_symmetric(data, 2);
  CHECK(std::isfinite(sym.loglik));
}

TEST_CASE("parameter counting and information criteria") {
  CHECK(parameter_count(Family::general, 0) == 0);
  CHECK(parameter_count(Family::symmetric, 0) == 0);
  CHECK(parameter_count(Family::general, 4) == 8);
  CHECK(parameter_count(Family::symmetric, 4) == 5);
  CHECK(aic_of(-100.0, 3) == doctest::Approx(206.0));
  CHECK(bic_of(-100.0, 3, 100) == doctest::Approx(200.0 + 3 * std::log(100.0)));
  CHECK_THROWS_AS(fit_general(AngleSample({1.0}), -1), std::invalid_argument);
}
