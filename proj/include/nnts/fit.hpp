#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nnts/model.hpp"

namespace nnts {

struct FitOptions {
  int max_iters = 2000;
  /// Convergence threshold on the per-observation projected gradient norm
  /// ||g/n - c||.
  double grad_tol = 1e-8;
  /// Alternative stop: relative log-likelihood change between accepted steps.
  double loglik_tol = 1e-10;
  /// Grid resolution for profiling the symmetry axis.
  int mu_grid_points = 512;
  /// Total number of starting points (deterministic perturbation start plus
  /// n_restarts-1 seeded random ones); the best final log-likelihood wins,
  /// ties broken by restart index.
  int n_restarts = 3;
  std::uint64_t seed = 0;
  /// When set, every accepted log-likelihood value is appended here.
  std::vector<double>* trace = nullptr;
};

struct FitReport {
  std::variant<NntsModel, SymmetricNntsModel> model;
  double loglik = 0.0;
  std::size_t n = 0;
  int n_params = 0;
  double aic = 0.0;
  double bic = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;

  int degree() const;
  const NntsModel* general() const { return std::get_if<NntsModel>(&model); }
  const SymmetricNntsModel* symmetric() const { return std::get_if<SymmetricNntsModel>(&model); }
};

/// Maximum-likelihood fit of the general model of degree m, by damped
/// fixed-point iteration on the complex unit hypersphere: candidate g/||g||,
/// geodesic step-halving when the plain step does not improve, gauge re-fixed
/// every iteration. The accepted log-likelihood sequence is nondecreasing.
FitReport fit_general(const AngleSample& data, int m, const FitOptions& opts = {});

/// Same, with extra caller-supplied starting points (used for warm starts).
FitReport fit_general(const AngleSample& data, int m, const FitOptions& opts,
                      std::span<const Coefficients> extra_inits);

/// Maximum-likelihood fit of the symmetric model of degree m: rho initialized
/// from the moduli of a general fit, then alternation of (a) profiling mu over
/// a grid with golden-section refinement and (b) re-fitting rho on the real
/// unit hypersphere, until the joint per-observation gradient norm drops
/// below grad_tol.
FitReport fit_symmetric(const AngleSample& data, int m, const FitOptions& opts = {});

struct FitPair {
  FitReport general;
  FitReport symmetric;
};

/// General and symmetric fits sharing work: the symmetric fit reuses the
/// general solution's moduli, and the general fit is additionally polished
/// from the embedded symmetric solution so the nesting l_S <= l_G holds up to
/// optimizer noise.
FitPair fit_both(const AngleSample& data, int m, const FitOptions& opts = {});

enum class Family { general, symmetric };

struct ScanEntry {
  std::optional<FitReport> report;
  std::string error;  // nonempty when the fit for this degree failed
  bool best_aic = false;
  bool best_bic = false;
};

/// Fits every degree 0..m_max, warm-starting each fit from the previous
/// degree's solution so the general log-likelihood is nondecreasing in M.
/// Per-degree failures are recorded in the entry without aborting the scan.
std::vector<ScanEntry> scan_models(const AngleSample& data, int m_max, Family family,
                                   const FitOptions& opts = {});

struct ScanBothEntry {
  std::optional<FitPair> fits;
  std::string error;
  bool best_general_aic = false;
  bool best_general_bic = false;
  bool best_symmetric_aic = false;
  bool best_symmetric_bic = false;
};

/// Paired scan used by the report generator: both families at every degree.
std::vector<ScanBothEntry> scan_both(const AngleSample& data, int m_max,
                                     const FitOptions& opts = {});

/// Free-parameter count: 2M for general models, M+1 for symmetric models with
/// M >= 1, zero at M=0 for both families.
int parameter_count(Family family, int m);

double aic_of(double loglik, int n_params);
double bic_of(double loglik, int n_params, std::size_t n);

}  // namespace nnts
