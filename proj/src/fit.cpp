#include "nnts/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nnts/kernels.hpp"
#include "nnts/rng.hpp"

namespace nnts {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;
constexpr int kMuBasins = 4;

double standard_normal(RngStream& rng) {
  const double u1 = 1.0 - rng.uniform();  // (0, 1]
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double sq_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s;
}

void normalize(std::vector<Complex>& v) {
  const double inv = 1.0 / std::sqrt(sq_norm(v));
  for (auto& c : v) c *= inv;
}

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  const double inv = 1.0 / std::sqrt(s);
  for (auto& x : v) x *= inv;
}

struct GeneralRun {
  std::vector<Complex> c;
  double loglik = kNegInf;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Damped fixed-point ascent on the complex unit sphere. The candidate step is
// the normalized score g/||g|| (g = n*c at a stationary point); when it does
// not improve, we back off along the geodesic from c toward the candidate.
GeneralRun fit_general_once(std::span<const Complex> phases, std::vector<Complex> init,
                            const FitOptions& opts) {
  const std::size_t n = phases.size();
  const std::size_t width = init.size();
  GeneralRun run;

  normalize(init);
  detail::fix_gauge(init);
  run.c = std::move(init);
  run.loglik = kernels::loglik(run.c, phases);
  if (opts.trace) opts.trace->push_back(run.loglik);
  if (run.loglik == kNegInf) return run;  // hopeless start; caller has restarts

  std::vector<Complex> g(width), cand(width), half(width);
  while (run.iterations < opts.max_iters) {
    ++run.iterations;
    kernels::score(run.c, phases, g);

    double gn = 0.0;
    for (std::size_t k = 0; k < width; ++k) gn += std::norm(g[k] / static_cast<double>(n) - run.c[k]);
    run.grad_norm = std::sqrt(gn);
    if (run.grad_norm < opts.grad_tol) {
      run.converged = true;
      return run;
    }

    cand = g;
    normalize(cand);
    detail::fix_gauge(cand);
    double ll_cand = kernels::loglik(cand, phases);

    if (ll_cand <= run.loglik) {
      // geodesic halving toward the candidate
      Complex ip_c(0.0, 0.0);
      for (std::size_t k = 0; k < width; ++k) ip_c += conj(run.c[k]) * cand[k];
      const double ip = std::clamp(ip_c.real(), -1.0, 1.0);
      const double phi = std::acos(ip);
      std::vector<Complex> u(width);
      double un = 0.0;
      for (std::size_t k = 0; k < width; ++k) {
        u[k] = cand[k] - ip * run.c[k];
        un += std::norm(u[k]);
      }
      un = std::sqrt(un);
      if (phi < 1e-15 || un < 1e-300) return run;  // no usable direction
      for (auto& x : u) x /= un;

      bool improved = false;
      double t = 1.0;
      for (int h = 0; h < 30; ++h) {
        t *= 0.5;
        const double ct = std::cos(t * phi), st = std::sin(t * phi);
        for (std::size_t k = 0; k < width; ++k) half[k] = ct * run.c[k] + st * u[k];
        normalize(half);
        detail::fix_gauge(half);
        const double ll_h = kernels::loglik(half, phases);
        if (ll_h > run.loglik) {
          cand = half;
          ll_cand = ll_h;
          improved = true;
          break;
        }
      }
      if (!improved) return run;  // stalled; grad_norm tells the caller how close
    }

    const double prev = run.loglik;
    run.c = cand;
    run.loglik = ll_cand;
    if (opts.trace) opts.trace->push_back(run.loglik);
    if (std::abs(run.loglik - prev) < opts.loglik_tol * (std::abs(prev) + 1.0)) {
      run.converged = true;
      return run;
    }
  }
  return run;
}

GeneralRun fit_general_multi(std::span<const Complex> phases, int m, const FitOptions& opts,
                             std::span<const Coefficients> extra_inits) {
  const std::size_t width = static_cast<std::size_t>(m) + 1;
  std::vector<std::vector<Complex>> inits;

  std::vector<Complex> perturb(width, Complex(0.01, 0.0));
  perturb[0] = Complex(1.0, 0.0);
  inits.push_back(std::move(perturb));

  for (int r = 1; r < opts.n_restarts; ++r) {
    RngStream rng(opts.seed, static_cast<std::uint64_t>(r));
    std::vector<Complex> v(width);
    for (auto& c : v) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      c = Complex(re, im);
    }
    inits.push_back(std::move(v));
  }
  for (const auto& e : extra_inits) inits.push_back(e.values());

  GeneralRun best;
  int total_iters = 0;
  for (auto& init : inits) {
    GeneralRun run = fit_general_once(phases, std::move(init), opts);
    total_iters += run.iterations;
    if (run.loglik > best.loglik) best = std::move(run);
  }
  best.iterations = total_iters;
  return best;
}

FitReport make_general_report(GeneralRun run, std::size_t n, int m) {
  FitReport rep{NntsModel(Coefficients::from_unnormalized(std::move(run.c))),
                run.loglik,
                n,
                parameter_count(Family::general, m),
                0.0,
                0.0,
                run.iterations,
                run.grad_norm,
                run.converged};
  rep.aic = aic_of(rep.loglik, rep.n_params);
  rep.bic = bic_of(rep.loglik, rep.n_params, n);
  return rep;
}

// ---- symmetric machinery ----

// Coefficients of the symmetric model in the data frame: d_k = rho_k e^{-ik*mu}.
void sym_coeffs(std::span<const double> rho, double mu, std::vector<Complex>& d) {
  d.resize(rho.size());
  d[0] = Complex(rho[0], 0.0);
  const Complex step = std::polar(1.0, -mu);
  Complex ph(1.0, 0.0);
  for (std::size_t k = 1; k < rho.size(); ++k) {
    ph *= step;
    d[k] = rho[k] * ph;
  }
}

double sym_loglik(std::span<const double> rho, double mu, std::span<const Complex> phases,
                  std::vector<Complex>& scratch) {
  sym_coeffs(rho, mu, scratch);
  return kernels::loglik(scratch, phases);
}

// Translated phases z_j * e^{-i*mu}, against which rho acts as a real
// coefficient vector.
void translate_phases(std::span<const Complex> phases, double mu, std::vector<Complex>& out) {
  out.resize(phases.size());
  const Complex rot = std::polar(1.0, -mu);
  for (std::size_t j = 0; j < phases.size(); ++j) out[j] = phases[j] * rot;
}

struct RhoScratch {
  std::vector<Complex> c, g, cand_c;
  std::vector<double> cand, u;
};

double loglik_real(std::span<const double> rho, std::span<const Complex> zpsi,
                   std::vector<Complex>& c) {
  c.resize(rho.size());
  for (std::size_t k = 0; k < rho.size(); ++k) c[k] = Complex(rho[k], 0.0);
  return kernels::loglik(c, zpsi);
}

// Real-sphere analogue of the general iteration: candidate Re(g)/||Re(g)||
// with the same geodesic safeguard. Returns the per-observation projected
// gradient norm reached.
double rho_refit(std::vector<double>& rho, std::span<const Complex> zpsi, int max_inner,
                 double grad_tol, double loglik_tol, RhoScratch& s, int& iters_used) {
  const double n = static_cast<double>(zpsi.size());
  const std::size_t width = rho.size();
  double ll = loglik_real(rho, zpsi, s.c);
  double gn_out = std::numeric_limits<double>::infinity();
  s.g.resize(width);
  s.cand.resize(width);
  s.u.resize(width);
  for (int it = 0; it < max_inner; ++it) {
    ++iters_used;
    kernels::score(s.c, zpsi, s.g);
    double gn = 0.0;
    for (std::size_t k = 0; k < width; ++k) {
      const double d = s.g[k].real() / n - rho[k];
      gn += d * d;
    }
    gn_out = std::sqrt(gn);
    if (gn_out < grad_tol) break;

    for (std::size_t k = 0; k < width; ++k) s.cand[k] = s.g[k].real();
    normalize(s.cand);
    double ll_cand = loglik_real(s.cand, zpsi, s.cand_c);

    if (ll_cand <= ll) {
      double ip = 0.0;
      for (std::size_t k = 0; k < width; ++k) ip += rho[k] * s.cand[k];
      ip = std::clamp(ip, -1.0, 1.0);
      const double phi = std::acos(ip);
      double un = 0.0;
      for (std::size_t k = 0; k < width; ++k) {
        s.u[k] = s.cand[k] - ip * rho[k];
        un += s.u[k] * s.u[k];
      }
      un = std::sqrt(un);
      if (phi < 1e-15 || un < 1e-300) break;
      for (auto& x : s.u) x /= un;

      bool improved = false;
      double t = 1.0;
      for (int h = 0; h < 30; ++h) {
        t *= 0.5;
        const double ct = std::cos(t * phi), st = std::sin(t * phi);
        for (std::size_t k = 0; k < width; ++k) s.cand[k] = ct * rho[k] + st * s.u[k];
        normalize(s.cand);
        const double ll_h = loglik_real(s.cand, zpsi, s.cand_c);
        if (ll_h > ll) {
          ll_cand = ll_h;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }

    const double prev = ll;
    rho = s.cand;
    for (std::size_t k = 0; k < width; ++k) s.c[k] = Complex(rho[k], 0.0);
    ll = ll_cand;
    if (std::abs(ll - prev) < loglik_tol * (std::abs(prev) + 1.0)) break;
  }
  return gn_out;
}

// Golden-section maximization of mu |-> loglik on a bracketing interval,
// refined to 1e-8 radians.
double refine_mu(std::span<const double> rho, std::span<const Complex> phases, double lo,
                 double hi, std::vector<Complex>& scratch) {
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double f1 = sym_loglik(rho, x1, phases, scratch);
  double f2 = sym_loglik(rho, x2, phases, scratch);
  while (hi - lo > 1e-8) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kGolden * (hi - lo);
      f2 = sym_loglik(rho, x2, phases, scratch);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kGolden * (hi - lo);
      f1 = sym_loglik(rho, x1, phases, scratch);
    }
  }
  return 0.5 * (lo + hi);
}

// Global profile of mu for fixed rho over the full grid, then golden-section.
double profile_mu(std::span<const double> rho, std::span<const Complex> phases, int grid_points,
                  std::vector<Complex>& scratch) {
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < grid_points; ++i) {
    const double ll = sym_loglik(rho, kTwoPi * i / grid_points, phases, scratch);
    if (ll > best) {
      best = ll;
      best_i = i;
    }
  }
  const double h = kTwoPi / grid_points;
  return refine_mu(rho, phases, best_i * h - h, best_i * h + h, scratch);
}

// d/dmu of the symmetric log-likelihood at (rho, mu): -2 sum_j Re(i z b'(z)/b(z))
// over translated phases z = e^{i(theta_j - mu)}.
double mu_derivative(std::span<const double> rho, std::span<const Complex> zpsi) {
  const std::size_t m = rho.size() - 1;
  double s = 0.0;
  for (const Complex& z : zpsi) {
    Complex b(rho[m], 0.0), db(0.0, 0.0);
    for (std::size_t k = m; k-- > 0;) {
      db = db * z + b;
      b = b * z + rho[k];
    }
    s += (Complex(0.0, 1.0) * z * db / b).real();
  }
  return -2.0 * s;
}

struct SymRun {
  std::vector<double> rho;
  double mu = 0.0;
  double loglik = kNegInf;
  int iterations = 0;
  double grad_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
};

// Paper-style alternation (profile mu, refit rho) run to convergence from one
// starting basin.
SymRun alternate_from(std::vector<double> rho, double mu, std::span<const Complex> phases,
                      const FitOptions& opts) {
  SymRun run;
  std::vector<Complex> scratch, zpsi;
  RhoScratch rs;
  double ll_prev = kNegInf;
  const int max_rounds = 60;
  for (int round = 0; round < max_rounds && run.iterations < opts.max_iters; ++round) {
    mu = profile_mu(rho, phases, opts.mu_grid_points, scratch);
    translate_phases(phases, mu, zpsi);
    const double rho_gn = rho_refit(rho, zpsi, std::min(400, opts.max_iters - run.iterations),
                                    opts.grad_tol, opts.loglik_tol, rs, run.iterations);
    const double ll = sym_loglik(rho, mu, phases, scratch);
    if (opts.trace) opts.trace->push_back(ll);

    const double dmu = mu_derivative(rho, zpsi) / static_cast<double>(phases.size());
    run.grad_norm = std::hypot(rho_gn, dmu);
    run.rho = rho;
    run.mu = mu;
    run.loglik = ll;
    if (run.grad_norm < opts.grad_tol) {
      run.converged = true;
      break;
    }
    if (std::abs(ll - ll_prev) < opts.loglik_tol * (std::abs(ll_prev) + 1.0)) {
      run.converged = true;
      break;
    }
    ll_prev = ll;
  }
  return run;
}

FitReport fit_symmetric_impl(const AngleSample& data, int m, const FitOptions& opts,
                             const FitReport* general) {
  if (m < 0) throw std::invalid_argument("fit_symmetric: m must be >= 0");
  const std::size_t n = data.size();

  if (m == 0) {
    FitReport rep{SymmetricNntsModel::uniform(),
                  static_cast<double>(n) * std::log(1.0 / kTwoPi),
                  n,
                  parameter_count(Family::symmetric, 0),
                  0.0,
                  0.0,
                  0,
                  0.0,
                  true};
    rep.aic = aic_of(rep.loglik, 0);
    rep.bic = bic_of(rep.loglik, 0, n);
    return rep;
  }

  const auto phases = kernels::unit_phases(data.angles());

  FitReport general_rep =
      general ? *general : make_general_report(fit_general_multi(phases, m, opts, {}), n, m);
  const auto& cg = general_rep.general()->coeffs().values();

  std::vector<double> moduli = general_rep.general()->coeffs().moduli();
  normalize(moduli);

  // Coarse profile of mu where each candidate's rho starts from the projection
  // of the general solution onto the symmetric slice, Re(c_k e^{ik*mu}), and
  // gets a capped refit. Plain moduli initialization loses the rho signs and
  // strands the alternation in the wrong basin.
  const int coarse = std::clamp(opts.mu_grid_points / 4, 32, 512);
  struct Basin {
    double loglik;
    double mu;
    std::vector<double> rho;
  };
  std::vector<Basin> prof(coarse);
  {
    std::vector<Complex> scratch, zpsi;
    RhoScratch rs;
    int scratch_iters = 0;
    for (int i = 0; i < coarse; ++i) {
      const double mu = kTwoPi * i / coarse;
      std::vector<double> rho(cg.size());
      double nr = 0.0;
      for (std::size_t k = 0; k < cg.size(); ++k) {
        rho[k] = (cg[k] * std::polar(1.0, static_cast<double>(k) * mu)).real();
        nr += rho[k] * rho[k];
      }
      if (nr > 1e-16) {
        const double inv = 1.0 / std::sqrt(nr);
        for (auto& x : rho) x *= inv;
      } else {
        rho = moduli;
      }
      translate_phases(phases, mu, zpsi);
      rho_refit(rho, zpsi, 40, 1e-6, opts.loglik_tol, rs, scratch_iters);
      prof[i] = Basin{sym_loglik(rho, mu, phases, scratch), mu, std::move(rho)};
    }
  }

  // circular local maxima of the coarse profile, best first
  std::vector<int> maxima;
  for (int i = 0; i < coarse; ++i) {
    const double prev = prof[(i + coarse - 1) % coarse].loglik;
    const double next = prof[(i + 1) % coarse].loglik;
    if (prof[i].loglik >= prev && prof[i].loglik >= next) maxima.push_back(i);
  }
  std::sort(maxima.begin(), maxima.end(),
            [&](int a, int b) { return prof[a].loglik > prof[b].loglik; });
  if (maxima.empty()) maxima.push_back(0);

  SymRun best;
  int total_iters = 0;
  const int basins = std::min<int>(kMuBasins, static_cast<int>(maxima.size()));
  for (int b = 0; b < basins; ++b) {
    const Basin& basin = prof[maxima[b]];
    SymRun run = alternate_from(basin.rho, basin.mu, phases, opts);
    total_iters += run.iterations;
    if (run.loglik > best.loglik) best = std::move(run);
  }
  // the moduli start as well, preserving the published initialization
  {
    SymRun run = alternate_from(moduli, prof[maxima[0]].mu, phases, opts);
    total_iters += run.iterations;
    if (run.loglik > best.loglik) best = std::move(run);
  }

  SymmetricNntsModel model =
      SymmetricNntsModel(std::move(best.rho), wrap_angle(best.mu)).canonical_axis();
  std::vector<Complex> scratch;
  const double ll = sym_loglik(model.rho(), model.mu(), phases, scratch);

  FitReport rep{std::move(model),
                ll,
                n,
                parameter_count(Family::symmetric, m),
                0.0,
                0.0,
                total_iters,
                best.grad_norm,
                best.converged};
  rep.aic = aic_of(rep.loglik, rep.n_params);
  rep.bic = bic_of(rep.loglik, rep.n_params, n);
  return rep;
}

Coefficients embed_higher(const Coefficients& c) {
  std::vector<Complex> v = c.values();
  v.push_back(Complex(0.0, 0.0));
  return Coefficients(std::move(v));
}

}  // namespace

int FitReport::degree() const {
  return std::visit([](const auto& m) { return m.degree(); }, model);
}

int parameter_count(Family family, int m) {
  if (m < 0) throw std::invalid_argument("parameter_count: m must be >= 0");
  if (m == 0) return 0;
  return family == Family::general ? 2 * m : m + 1;
}

double aic_of(double loglik, int n_params) { return -2.0 * loglik + 2.0 * n_params; }

double bic_of(double loglik, int n_params, std::size_t n) {
  return -2.0 * loglik + std::log(static_cast<double>(n)) * n_params;
}

FitReport fit_general(const AngleSample& data, int m, const FitOptions& opts) {
  return fit_general(data, m, opts, {});
}

FitReport fit_general(const AngleSample& data, int m, const FitOptions& opts,
                      std::span<const Coefficients> extra_inits) {
  if (m < 0) throw std::invalid_argument("fit_general: m must be >= 0");
  const std::size_t n = data.size();
  if (m == 0) {
    FitReport rep{NntsModel::uniform(),
                  static_cast<double>(n) * std::log(1.0 / kTwoPi),
                  n,
                  0,
                  0.0,
                  0.0,
                  0,
                  0.0,
                  true};
    rep.aic = aic_of(rep.loglik, 0);
    rep.bic = bic_of(rep.loglik, 0, n);
    return rep;
  }
  const auto phases = kernels::unit_phases(data.angles());
  return make_general_report(fit_general_multi(phases, m, opts, extra_inits), n, m);
}

FitReport fit_symmetric(const AngleSample& data, int m, const FitOptions& opts) {
  return fit_symmetric_impl(data, m, opts, nullptr);
}

FitPair fit_both(const AngleSample& data, int m, const FitOptions& opts) {
  FitReport general = fit_general(data, m, opts);
  FitReport symmetric = fit_symmetric_impl(data, m, opts, &general);
  if (m >= 1) {
    // polish the general fit from the embedded symmetric solution; keeps the
    // nested likelihoods ordered up to optimizer noise
    const Coefficients embed = symmetric.symmetric()->to_general().coeffs();
    const Coefficients inits[] = {embed};
    const auto phases = kernels::unit_phases(data.angles());
    FitOptions polish_opts = opts;
    polish_opts.n_restarts = 1;
    GeneralRun polished = fit_general_once(phases, inits[0].values(), polish_opts);
    if (polished.loglik > general.loglik)
      general = make_general_report(std::move(polished), data.size(), m);
  }
  return FitPair{std::move(general), std::move(symmetric)};
}

std::vector<ScanEntry> scan_models(const AngleSample& data, int m_max, Family family,
                                   const FitOptions& opts) {
  if (m_max < 0) throw std::invalid_argument("scan_models: m_max must be >= 0");
  std::vector<ScanEntry> entries(static_cast<std::size_t>(m_max) + 1);
  std::optional<Coefficients> warm;

  for (int m = 0; m <= m_max; ++m) {
    auto& entry = entries[m];
    try {
      if (family == Family::general) {
        std::vector<Coefficients> extra;
        if (warm) extra.push_back(embed_higher(*warm));
        entry.report = fit_general(data, m, opts, extra);
        warm = entry.report->general()->coeffs();
      } else {
        entry.report = fit_symmetric(data, m, opts);
      }
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
  }

  int best_aic = -1, best_bic = -1;
  for (int m = 0; m <= m_max; ++m) {
    if (!entries[m].report) continue;
    if (best_aic < 0 || entries[m].report->aic < entries[best_aic].report->aic) best_aic = m;
    if (best_bic < 0 || entries[m].report->bic < entries[best_bic].report->bic) best_bic = m;
  }
  if (best_aic >= 0) entries[best_aic].best_aic = true;
  if (best_bic >= 0) entries[best_bic].best_bic = true;
  return entries;
}

std::vector<ScanBothEntry> scan_both(const AngleSample& data, int m_max, const FitOptions& opts) {
  if (m_max < 0) throw std::invalid_argument("scan_both: m_max must be >= 0");
  std::vector<ScanBothEntry> entries(static_cast<std::size_t>(m_max) + 1);
  std::optional<Coefficients> warm;
  const auto phases = kernels::unit_phases(data.angles());

  for (int m = 0; m <= m_max; ++m) {
    auto& entry = entries[m];
    try {
      std::vector<Coefficients> extra;
      if (warm) extra.push_back(embed_higher(*warm));
      FitReport general = fit_general(data, m, opts, extra);
      FitReport symmetric = fit_symmetric_impl(data, m, opts, &general);
      if (m >= 1) {
        FitOptions polish_opts = opts;
        polish_opts.n_restarts = 1;
        GeneralRun polished = fit_general_once(
            phases, symmetric.symmetric()->to_general().coeffs().values(), polish_opts);
        if (polished.loglik > general.loglik)
          general = make_general_report(std::move(polished), data.size(), m);
      }
      warm = general.general()->coeffs();
      entry.fits = FitPair{std::move(general), std::move(symmetric)};
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
  }

  int bga = -1, bgb = -1, bsa = -1, bsb = -1;
  for (int m = 0; m <= m_max; ++m) {
    if (!entries[m].fits) continue;
    const auto& f = *entries[m].fits;
    if (bga < 0 || f.general.aic < entries[bga].fits->general.aic) bga = m;
    if (bgb < 0 || f.general.bic < entries[bgb].fits->general.bic) bgb = m;
    if (bsa < 0 || f.symmetric.aic < entries[bsa].fits->symmetric.aic) bsa = m;
    if (bsb < 0 || f.symmetric.bic < entries[bsb].fits->symmetric.bic) bsb = m;
  }
  if (bga >= 0) entries[bga].best_general_aic = true;
  if (bgb >= 0) entries[bgb].best_general_bic = true;
  if (bsa >= 0) entries[bsa].best_symmetric_aic = true;
  if (bsb >= 0) entries[bsb].best_symmetric_bic = true;
  return entries;
}

}  // namespace nnts
