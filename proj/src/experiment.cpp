#include "nnts/experiment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nnts {

std::string test_config_label(const TestConfig& config) {
  std::string label{test_kind_name(config.kind)};
  if (config.kind != TestKind::b2_bootstrap) label += ":m" + std::to_string(config.m);
  return label;
}

int RejectionCell::rejections(double alpha) const {
  int c = 0;
  for (double p : p_values)
    if (p <= alpha) ++c;
  return c;
}

double RejectionCell::rate(double alpha) const {
  if (p_values.empty()) return 0.0;
  return static_cast<double>(rejections(alpha)) / static_cast<double>(p_values.size());
}

namespace {

AngleSample sample_nnts_or_ksine(const NntsModel& m, std::size_t n, RngStream s) {
  return sample_nnts(m, n, s);
}
AngleSample sample_nnts_or_ksine(const SymmetricNntsModel& m, std::size_t n, RngStream s) {
  return sample_nnts(m, n, s);
}
AngleSample sample_nnts_or_ksine(const KSineModel& m, std::size_t n, RngStream s) {
  return sample_ksine(m, n, s);
}

AngleSample draw_dataset(const GeneratorModel& model, std::size_t n, RngStream stream) {
  return std::visit([&](const auto& m) { return sample_nnts_or_ksine(m, n, stream); }, model);
}

double run_one_test(const TestConfig& cfg, const AngleSample& data, std::uint64_t seed,
                    const FitOptions& base_opts) {
  FitOptions opts = base_opts;
  opts.trace = nullptr;
  opts.seed = mix_seed(seed, 1);
  switch (cfg.kind) {
    case TestKind::lr_asymptotic:
      return lr_test_asymptotic(data, cfg.m, opts).p_value;
    case TestKind::lr_bootstrap:
      return lr_test_bootstrap(data, cfg.m, cfg.k_replicates, seed, opts).p_value;
    case TestKind::b2_bootstrap:
      return b2_test_bootstrap(data, cfg.k_replicates, seed).p_value;
    case TestKind::wald:
      break;
  }
  throw std::invalid_argument("run_experiment: unsupported test kind");
}

}  // namespace

RejectionTable run_experiment(const ExperimentSpec& spec) {
  if (spec.generators.empty())
    throw std::invalid_argument("run_experiment: no generators configured");
  if (spec.n_datasets < 1) throw std::invalid_argument("run_experiment: n_datasets must be >= 1");
  if (spec.tests.empty()) throw std::invalid_argument("run_experiment: no tests configured");
  for (double a : spec.alphas)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("run_experiment: alphas must lie in (0, 1)");

  RejectionTable table;
  const int nd = spec.n_datasets;

  for (std::size_t gi = 0; gi < spec.generators.size(); ++gi) {
    const auto& gen = spec.generators[gi];
    for (std::size_t si = 0; si < spec.sample_sizes.size(); ++si) {
      const std::size_t n = spec.sample_sizes[si];
      // p[t][d]: NaN marks a failed dataset/test evaluation
      std::vector<std::vector<double>> p(spec.tests.size(),
                                         std::vector<double>(nd, std::nan("")));

#pragma omp parallel for schedule(dynamic)
      for (int d = 0; d < nd; ++d) {
        const RngStream cell =
            RngStream(spec.master_seed, gi).substream(si).substream(static_cast<std::uint64_t>(d));
        try {
          const AngleSample data = draw_dataset(gen.model, n, cell);
          for (std::size_t ti = 0; ti < spec.tests.size(); ++ti) {
            RngStream tstream = cell.substream(1000 + ti);
            const std::uint64_t tseed = tstream.next_u64();
            try {
              p[ti][d] = run_one_test(spec.tests[ti], data, tseed, spec.fit_options);
            } catch (const std::exception&) {
              // recorded as a failure for this test only
            }
          }
        } catch (const std::exception&) {
          // dataset draw failed; all tests for this d stay failed
        }
      }

      for (std::size_t ti = 0; ti < spec.tests.size(); ++ti) {
        RejectionCell cell;
        cell.generator = gen.id;
        cell.test = test_config_label(spec.tests[ti]);
        cell.m = spec.tests[ti].kind == TestKind::b2_bootstrap ? 0 : spec.tests[ti].m;
        cell.n = n;
        for (int d = 0; d < nd; ++d) {
          if (std::isnan(p[ti][d]))
            ++cell.n_failed;
          else
            cell.p_values.push_back(p[ti][d]);
        }
        if (cell.n_failed * 20 > nd)  // more than 5% failed
          throw std::runtime_error("run_experiment: generator '" + gen.id + "' test '" +
                                   cell.test + "' n=" + std::to_string(n) + ": " +
                                   std::to_string(cell.n_failed) + "/" + std::to_string(nd) +
                                   " datasets failed");
        table.cells.push_back(std::move(cell));
      }
    }
  }
  return table;
}

UniformityReport pvalue_uniformity(const SymmetricNntsModel& generator, std::size_t n,
                                   int n_datasets, int m, std::uint64_t seed,
                                   const FitOptions& opts) {
  if (n_datasets < 1)
    throw std::invalid_argument("pvalue_uniformity: n_datasets must be >= 1");
  std::vector<double> pvals(n_datasets);
#pragma omp parallel for schedule(dynamic)
  for (int d = 0; d < n_datasets; ++d) {
    const RngStream stream = RngStream(seed, static_cast<std::uint64_t>(d));
    const AngleSample data = sample_nnts(generator, n, stream);
    FitOptions o = opts;
    o.trace = nullptr;
    o.seed = mix_seed(seed, (1ULL << 40) + static_cast<std::uint64_t>(d));
    pvals[d] = lr_test_asymptotic(data, m, o).p_value;
  }
  const KsResult ks = ks_uniform01(std::move(pvals));
  UniformityReport rep;
  rep.ks_statistic = ks.statistic;
  rep.ks_p_value = ks.p_value;
  rep.n_datasets = n_datasets;
  rep.n = n;
  rep.m = m;
  rep.small_sample_warning = asymptotic_sample_too_small(n, m);
  return rep;
}

}  // namespace nnts
