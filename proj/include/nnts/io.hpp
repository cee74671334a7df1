#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nnts/angles.hpp"
#include "nnts/experiment.hpp"
#include "nnts/fit.hpp"
#include "nnts/sampling.hpp"
#include "nnts/symmetry_tests.hpp"

namespace nnts {

/// Unreadable, unparseable or invalid input data (CLI exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structured-file violation, reported with the path of the failing field.
struct SchemaError : DataError {
  using DataError::DataError;
};

/// Reads one numeric column of a CSV/plain text file and converts it to
/// radians on [0, 2*pi). `column` selects by header name or 0-based index;
/// absent means column 0. Blank lines are skipped, a non-numeric first row is
/// treated as a header, and any other unparseable row raises a DataError
/// carrying its line number.
AngleSample parse_angles(const std::filesystem::path& path, SourceUnit unit,
                         const std::optional<std::string>& column = {});

using AnyModel = std::variant<NntsModel, SymmetricNntsModel, KSineModel>;

/// Model files are JSON documents with a schema_version, a type tag
/// (nnts_general | nnts_symmetric | ksine) and a payload; loading validates
/// every model invariant and re-fixes the coefficient gauge.
nlohmann::json model_to_json(const AnyModel& model);
AnyModel model_from_json(const nlohmann::json& doc, const std::string& context = "model");

void save_model(const AnyModel& model, const std::filesystem::path& path);
AnyModel load_model(const std::filesystem::path& path);

nlohmann::json test_result_to_json(const TestResult& result);

/// One row of the fit report (columns mirror the summary-table layout:
/// general loglik/AIC/BIC, symmetric loglik/AIC/BIC, mu_hat, LR, chi-squared
/// p-value, SK). Fields are empty when not applicable.
struct ReportRow {
  int m = 0;
  std::optional<double> loglik_general, aic_general, bic_general;
  std::optional<double> loglik_symmetric, aic_symmetric, bic_symmetric;
  std::optional<double> mu_hat;
  std::optional<double> lr_gs, chi2_p, sk;
  bool best_general = false;
  bool best_symmetric = false;
};

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out);
void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);

void write_sample_csv(const AngleSample& sample, const std::filesystem::path& path);

void write_density_csv(const NntsModel& model, int grid_points,
                       const std::filesystem::path& path);

/// Experiment configuration (JSON): master_seed, n_datasets, sample_sizes,
/// alphas, generators (inline model payloads or {"file": path} references)
/// and tests. Schema errors name the failing field path.
ExperimentSpec load_experiment_config(const std::filesystem::path& path);

void write_rejection_csv(const RejectionTable& table, const std::vector<double>& alphas,
                         int n_datasets, const std::filesystem::path& path);

nlohmann::json audit_to_json(const RejectionTable& table, const ExperimentSpec& spec);

/// Fixed-format decimal rendering used across all emitted files: shortest
/// representation that round-trips a double ('.' separator, no locale).
std::string format_double(double value);

}  // namespace nnts
