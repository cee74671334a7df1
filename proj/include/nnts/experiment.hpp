#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nnts/fit.hpp"
#include "nnts/ks.hpp"
#include "nnts/sampling.hpp"
#include "nnts/symmetry_tests.hpp"

namespace nnts {

using GeneratorModel = std::variant<NntsModel, SymmetricNntsModel, KSineModel>;

struct GeneratorEntry {
  std::string id;
  GeneratorModel model;
};

struct TestConfig {
  TestKind kind = TestKind::lr_asymptotic;
  int m = 2;                // ignored by b2_bootstrap
  int k_replicates = 999;   // bootstrap tests only
};

std::string test_config_label(const TestConfig& config);

struct ExperimentSpec {
  std::vector<GeneratorEntry> generators;
  std::vector<std::size_t> sample_sizes;
  int n_datasets = 100;
  std::vector<TestConfig> tests;
  std::vector<double> alphas;
  std::uint64_t master_seed = 0;
  FitOptions fit_options;
};

/// One (generator, test, n) cell with every replicate p-value retained for
/// auditing.
struct RejectionCell {
  std::string generator;
  std::string test;
  int m = 0;
  std::size_t n = 0;
  std::vector<double> p_values;  // one per successful dataset
  int n_failed = 0;

  int rejections(double alpha) const;
  double rate(double alpha) const;
};

struct RejectionTable {
  std::vector<RejectionCell> cells;
};

/// Runs the full grid: for each (generator, n, dataset index) a dataset is
/// drawn from a deterministic sub-stream and every configured test is applied
/// to it. Dataset failures are excluded with a warning count; a cell with
/// more than 5% failures aborts the run.
RejectionTable run_experiment(const ExperimentSpec& spec);

struct UniformityReport {
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  int n_datasets = 0;
  std::size_t n = 0;
  int m = 0;
  bool small_sample_warning = false;
};

/// Calibration check of the asymptotic LR test: n_datasets samples of size n
/// from the generator, the test applied at degree m, and a KS test of the
/// p-values against U[0,1]. Sets the warning flag when n < 25*m.
UniformityReport pvalue_uniformity(const SymmetricNntsModel& generator, std::size_t n,
                                   int n_datasets, int m, std::uint64_t seed,
                                   const FitOptions& opts = {});

}  // namespace nnts
