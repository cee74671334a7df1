// Command-line front end: fit, symmetry-test, simulate, density, experiment.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "nnts/experiment.hpp"
#include "nnts/fit.hpp"
#include "nnts/io.hpp"
#include "nnts/sampling.hpp"
#include "nnts/symmetry_tests.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgs = 2;
constexpr int kExitData = 3;
constexpr int kExitNoConvergence = 4;

nnts::SourceUnit parse_unit(const std::string& unit) {
  if (unit == "rad") return nnts::SourceUnit::radians;
  if (unit == "deg") return nnts::SourceUnit::degrees;
  if (unit == "hour24") return nnts::SourceUnit::hours24;
  throw CLI::ValidationError("--unit", "must be one of rad|deg|hour24");
}

struct CommonFitArgs {
  std::string input;
  std::string unit = "rad";
  std::optional<std::string> column;
  std::uint64_t seed = 0;
  int restarts = 3;
  int max_iters = 2000;
};

void add_common(CLI::App* cmd, CommonFitArgs& args) {
  cmd->add_option("--input", args.input, "CSV or plain text file of angles")->required();
  cmd->add_option("--unit", args.unit, "input unit: rad|deg|hour24")
      ->check(CLI::IsMember({"rad", "deg", "hour24"}));
  std::string col;
  cmd->add_option_function<std::string>(
      "--column", [&args](const std::string& c) { args.column = c; },
      "column name or 0-based index (default: first column)");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--restarts", args.restarts, "optimizer restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iters", args.max_iters, "optimizer iteration budget")
      ->check(CLI::PositiveNumber);
}

nnts::FitOptions options_from(const CommonFitArgs& args) {
  nnts::FitOptions opts;
  opts.seed = nnts::mix_seed(args.seed, 1);
  opts.n_restarts = args.restarts;
  opts.max_iters = args.max_iters;
  return opts;
}

void warn_small_sample(std::size_t n, int m) {
  if (nnts::asymptotic_sample_too_small(n, m))
    std::cerr << "warning: n = " << n << " is below 25*M = " << 25 * m
              << "; the bootstrapped LR test is recommended\n";
}

int run_fit(const CommonFitArgs& common, const std::string& family, int m_max,
            std::optional<int> m_fixed, const std::string& criterion,
            const std::string& out_model, const std::string& out_report, bool strict) {
  const nnts::AngleSample data =
      nnts::parse_angles(common.input, parse_unit(common.unit), common.column);
  const nnts::FitOptions opts = options_from(common);
  const bool use_aic = criterion == "aic";

  std::vector<nnts::ReportRow> rows;
  std::vector<std::pair<double, nnts::AnyModel>> candidates;  // (criterion, model)
  bool any_unconverged = false;

  auto general_row = [&](nnts::ReportRow& row, const nnts::FitReport& rep) {
    row.loglik_general = rep.loglik;
    row.aic_general = rep.aic;
    row.bic_general = rep.bic;
    any_unconverged |= !rep.converged;
    candidates.emplace_back(use_aic ? rep.aic : rep.bic, nnts::AnyModel(*rep.general()));
  };
  auto symmetric_row = [&](nnts::ReportRow& row, const nnts::FitReport& rep, bool skip_m0) {
    if (rep.degree() == 0 && skip_m0) return;
    row.loglik_symmetric = rep.loglik;
    row.aic_symmetric = rep.aic;
    row.bic_symmetric = rep.bic;
    if (rep.degree() >= 1) row.mu_hat = rep.symmetric()->mu();
    any_unconverged |= !rep.converged;
    candidates.emplace_back(use_aic ? rep.aic : rep.bic, nnts::AnyModel(*rep.symmetric()));
  };
  auto lr_columns = [&](nnts::ReportRow& row, const nnts::FitPair& fits) {
    if (fits.general.degree() < 2) return;
    try {
      const double lr = nnts::lr_statistic(fits.general, fits.symmetric);
      row.lr_gs = lr;
      row.chi2_p = nnts::chisq_sf(lr, fits.general.degree() - 1);
      row.sk = nnts::sk_nnts(fits.general.general()->coeffs(), fits.symmetric.symmetric()->mu());
    } catch (const std::exception& e) {
      std::cerr << "warning: M=" << fits.general.degree() << ": " << e.what() << "\n";
    }
  };

  if (family == "both") {
    if (m_fixed) {
      const nnts::FitPair fits = nnts::fit_both(data, *m_fixed, opts);
      nnts::ReportRow row;
      row.m = *m_fixed;
      general_row(row, fits.general);
      symmetric_row(row, fits.symmetric, true);
      lr_columns(row, fits);
      row.best_general = row.best_symmetric = true;
      rows.push_back(row);
    } else {
      const auto entries = nnts::scan_both(data, m_max, opts);
      for (int m = 0; m < static_cast<int>(entries.size()); ++m) {
        nnts::ReportRow row;
        row.m = m;
        if (!entries[m].fits) {
          std::cerr << "warning: M=" << m << ": " << entries[m].error << "\n";
          rows.push_back(row);
          continue;
        }
        general_row(row, entries[m].fits->general);
        symmetric_row(row, entries[m].fits->symmetric, true);
        lr_columns(row, *entries[m].fits);
        row.best_general = use_aic ? entries[m].best_general_aic : entries[m].best_general_bic;
        row.best_symmetric =
            use_aic ? entries[m].best_symmetric_aic : entries[m].best_symmetric_bic;
        rows.push_back(row);
      }
    }
  } else {
    const nnts::Family fam =
        family == "general" ? nnts::Family::general : nnts::Family::symmetric;
    auto fill = [&](nnts::ReportRow& row, const nnts::FitReport& rep, bool best) {
      if (fam == nnts::Family::general) {
        general_row(row, rep);
        row.best_general = best;
      } else {
        symmetric_row(row, rep, false);
        row.best_symmetric = best;
      }
    };
    if (m_fixed) {
      const nnts::FitReport rep = fam == nnts::Family::general
                                      ? nnts::fit_general(data, *m_fixed, opts)
                                      : nnts::fit_symmetric(data, *m_fixed, opts);
      nnts::ReportRow row;
      row.m = *m_fixed;
      fill(row, rep, true);
      rows.push_back(row);
    } else {
      const auto entries = nnts::scan_models(data, m_max, fam, opts);
      for (int m = 0; m < static_cast<int>(entries.size()); ++m) {
        nnts::ReportRow row;
        row.m = m;
        if (!entries[m].report) {
          std::cerr << "warning: M=" << m << ": " << entries[m].error << "\n";
          rows.push_back(row);
          continue;
        }
        fill(row, *entries[m].report, use_aic ? entries[m].best_aic : entries[m].best_bic);
        rows.push_back(row);
      }
    }
  }

  if (!out_report.empty())
    nnts::write_report_csv(rows, std::filesystem::path(out_report));
  else
    nnts::write_report_csv(rows, std::cout);

  if (!out_model.empty()) {
    if (candidates.empty()) throw nnts::DataError("no fitted model to save");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
      if (candidates[i].first < candidates[best].first) best = i;
    nnts::save_model(candidates[best].second, out_model);
  }

  if (strict && any_unconverged) {
    std::cerr << "error: at least one fit did not converge (--strict)\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int run_symmetry_test(const CommonFitArgs& common, const std::string& method,
                      const std::string& m_arg, int k, int m_max, const std::string& out) {
  const nnts::AngleSample data =
      nnts::parse_angles(common.input, parse_unit(common.unit), common.column);
  const nnts::FitOptions opts = options_from(common);

  const bool want_lr_asym = method == "lr-asymptotic" || method == "all";
  const bool want_lr_boot = method == "lr-bootstrap" || method == "all";
  const bool want_b2 = method == "b2-bootstrap" || method == "all";

  int m = 0;
  if (want_lr_asym || want_lr_boot) {
    if (m_arg == "auto") {
      if (m_max < 2) throw CLI::ValidationError("--m-max", "auto selection needs m-max >= 2");
      const auto entries = nnts::scan_models(data, m_max, nnts::Family::symmetric, opts);
      double best = 0.0;
      for (int mm = 2; mm < static_cast<int>(entries.size()); ++mm) {
        if (!entries[mm].report) continue;
        if (m == 0 || entries[mm].report->bic < best) {
          best = entries[mm].report->bic;
          m = mm;
        }
      }
      if (m == 0) throw nnts::DataError("auto M selection failed: no symmetric fit succeeded");
      std::cerr << "selected M=" << m << " (best-BIC symmetric model, M >= 2)\n";
    } else {
      try {
        m = std::stoi(m_arg);
      } catch (const std::exception&) {
        throw CLI::ValidationError("--m", "expected an integer or 'auto'");
      }
      if (m == 1)
        throw CLI::ValidationError("--m", "M=1 NNTS models are symmetric by definition");
      if (m < 2) throw CLI::ValidationError("--m", "LR tests require M >= 2");
    }
    warn_small_sample(data.size(), m);
  }

  nlohmann::json results = nlohmann::json::array();
  if (want_lr_asym)
    results.push_back(nnts::test_result_to_json(nnts::lr_test_asymptotic(data, m, opts)));
  if (want_lr_boot)
    results.push_back(
        nnts::test_result_to_json(nnts::lr_test_bootstrap(data, m, k, common.seed, opts)));
  if (want_b2)
    results.push_back(nnts::test_result_to_json(
        nnts::b2_test_bootstrap(data, k, nnts::mix_seed(common.seed, 2))));

  const std::string text = results.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out);
    if (!os) throw nnts::DataError("cannot write " + out);
    os << text;
  }
  return kExitOk;
}

int run_simulate(const std::string& model_path, long long n, std::uint64_t seed,
                 const std::string& out) {
  if (n < 1) throw CLI::ValidationError("--n", "must be >= 1");
  const nnts::AnyModel model = nnts::load_model(model_path);
  nnts::RngStream rng(seed);
  const nnts::AngleSample sample = std::visit(
      [&](const auto& m) -> nnts::AngleSample {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, nnts::KSineModel>)
          return nnts::sample_ksine(m, static_cast<std::size_t>(n), rng);
        else
          return nnts::sample_nnts(m, static_cast<std::size_t>(n), rng);
      },
      model);
  nnts::write_sample_csv(sample, out);
  return kExitOk;
}

int run_density(const std::string& model_path, int grid, const std::string& out) {
  if (grid < 8) throw CLI::ValidationError("--grid", "must be >= 8");
  const nnts::AnyModel model = nnts::load_model(model_path);
  if (const auto* k = std::get_if<nnts::KSineModel>(&model)) {
    std::ofstream os(out);
    if (!os) throw nnts::DataError("cannot write " + out);
    os << "theta,density\n";
    for (int i = 0; i < grid; ++i) {
      const double t = nnts::kTwoPi * i / grid;
      os << nnts::format_double(t) << ',' << nnts::format_double(nnts::ksine_density(*k, t))
         << '\n';
    }
    return kExitOk;
  }
  const nnts::NntsModel general = std::holds_alternative<nnts::NntsModel>(model)
                                      ? std::get<nnts::NntsModel>(model)
                                      : std::get<nnts::SymmetricNntsModel>(model).to_general();
  nnts::write_density_csv(general, grid, out);
  return kExitOk;
}

int run_experiment_cmd(const std::string& config_path, const std::string& out_dir) {
  const nnts::ExperimentSpec spec = nnts::load_experiment_config(config_path);
  const nnts::RejectionTable table = nnts::run_experiment(spec);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  nnts::write_rejection_csv(table, spec.alphas, spec.n_datasets, dir / "rates.csv");
  std::ofstream audit(dir / "audit.json");
  if (!audit) throw nnts::DataError("cannot write " + (dir / "audit.json").string());
  audit << nnts::audit_to_json(table, spec).dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
  // Worker-count hint only; results are independent of the thread count.
  if (const char* threads = std::getenv("NNTS_THREADS")) {
    const int t = std::atoi(threads);
    if (t > 0) omp_set_num_threads(t);
  }
#endif

  CLI::App app{"Nonnegative trigonometric sums: circular model fitting and reflective "
               "symmetry tests"};
  app.require_subcommand(1);

  CommonFitArgs fit_args;
  std::string family = "both", criterion = "bic", out_model, out_report;
  int m_max = 5;
  int m_value = -1;
  bool strict = false;
  auto* fit = app.add_subcommand("fit", "fit NNTS models and write a model-comparison report");
  add_common(fit, fit_args);
  fit->add_option("--family", family, "general|symmetric|both")
      ->check(CLI::IsMember({"general", "symmetric", "both"}));
  fit->add_option("--m-max", m_max, "largest degree to scan")->check(CLI::NonNegativeNumber);
  fit->add_option("--m", m_value, "fit a single degree instead of scanning");
  fit->add_option("--criterion", criterion, "aic|bic")->check(CLI::IsMember({"aic", "bic"}));
  fit->add_option("--out-model", out_model, "write the best model as JSON");
  fit->add_option("--out-report", out_report, "write the report CSV here (default: stdout)");
  fit->add_flag("--strict", strict, "exit 4 if any fit fails to converge");

  CommonFitArgs st_args;
  std::string method, m_arg = "auto", st_out;
  int k = 999, st_m_max = 10;
  auto* st = app.add_subcommand("symmetry-test", "test reflective symmetry");
  add_common(st, st_args);
  st->add_option("--method", method, "lr-asymptotic|lr-bootstrap|b2-bootstrap|all")
      ->required()
      ->check(CLI::IsMember({"lr-asymptotic", "lr-bootstrap", "b2-bootstrap", "all"}));
  st->add_option("--m", m_arg, "degree for the LR tests, or 'auto' (best-BIC symmetric)");
  st->add_option("--k", k, "bootstrap replicates")->check(CLI::Range(99, 1000000));
  st->add_option("--m-max", st_m_max, "scan bound for --m auto");
  st->add_option("--out", st_out, "write the JSON results here (default: stdout)");

  std::string sim_model, sim_out;
  long long sim_n = 0;
  std::uint64_t sim_seed = 0;
  auto* sim = app.add_subcommand("simulate", "draw a sample from a saved model");
  sim->add_option("--model", sim_model, "model JSON file")->required();
  sim->add_option("--n", sim_n, "sample size")->required();
  sim->add_option("--seed", sim_seed, "stream seed");
  sim->add_option("--out", sim_out, "output CSV")->required();

  std::string den_model, den_out;
  int den_grid = 512;
  auto* den = app.add_subcommand("density", "evaluate a saved model on a uniform grid");
  den->add_option("--model", den_model, "model JSON file")->required();
  den->add_option("--grid", den_grid, "grid points on [0, 2*pi)");
  den->add_option("--out", den_out, "output CSV")->required();

  std::string exp_config, exp_out_dir;
  auto* exp = app.add_subcommand("experiment", "run a size/power simulation grid");
  exp->add_option("--config", exp_config, "experiment config JSON")->required();
  exp->add_option("--out-dir", exp_out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitArgs;
  }

  try {
    if (fit->parsed())
      return run_fit(fit_args, family, m_max,
                     m_value >= 0 ? std::optional<int>(m_value) : std::nullopt, criterion,
                     out_model, out_report, strict);
    if (st->parsed()) return run_symmetry_test(st_args, method, m_arg, k, st_m_max, st_out);
    if (sim->parsed()) return run_simulate(sim_model, sim_n, sim_seed, sim_out);
    if (den->parsed()) return run_density(den_model, den_grid, den_out);
    if (exp->parsed()) return run_experiment_cmd(exp_config, exp_out_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const nnts::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
