#include "nnts/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nnts {

namespace {

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      cur += ch;
    } else if (ch == ',' && !quoted) {
      out.push_back(unquote(trim(cur)));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(unquote(trim(cur)));
  return out;
}

bool parse_number(const std::string& tok, double& out) {
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

double unit_to_radians(double x, SourceUnit unit) {
  switch (unit) {
    case SourceUnit::radians: return x;
    case SourceUnit::degrees: return x * (kTwoPi / 360.0);
    case SourceUnit::hours24: return x * (kTwoPi / 24.0);
  }
  throw std::invalid_argument("unknown source unit");
}

}  // namespace

AngleSample parse_angles(const std::filesystem::path& path, SourceUnit unit,
                         const std::optional<std::string>& column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::size_t col_index = 0;
  bool col_by_name = false;
  std::string col_name;
  if (column) {
    const std::string c = trim(*column);
    if (!c.empty() && c.find_first_not_of("0123456789") == std::string::npos) {
      col_index = std::stoul(c);
    } else {
      col_by_name = true;
      col_name = c;
    }
  }

  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool seen_data = false;
  bool header_resolved = !col_by_name;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);

    if (!header_resolved) {
      bool found = false;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == col_name) {
          col_index = i;
          found = true;
          break;
        }
      }
      if (!found)
        throw DataError(path.string() + ": no column named '" + col_name + "' in header");
      header_resolved = true;
      continue;
    }

    if (col_index >= fields.size())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected at least " +
                      std::to_string(col_index + 1) + " columns, found " +
                      std::to_string(fields.size()));
    double x = 0.0;
    if (!parse_number(fields[col_index], x)) {
      if (!seen_data) continue;  // a single leading header row is tolerated
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-numeric value '" +
                      fields[col_index] + "'");
    }
    if (!std::isfinite(x))
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": non-finite value rejected");
    values.push_back(wrap_angle(unit_to_radians(x, unit)));
    seen_data = true;
  }
  if (values.empty()) throw DataError(path.string() + ": no numeric data");
  return AngleSample(std::move(values), unit, path.string());
}

std::string format_double(double value) {
  // shortest decimal form that parses back to the same bits
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

namespace {

const nlohmann::json* find(const nlohmann::json& doc, const char* key) {
  const auto it = doc.find(key);
  return it == doc.end() ? nullptr : &*it;
}

const nlohmann::json& require(const nlohmann::json& doc, const char* key,
                              const std::string& ctx) {
  const auto* p = find(doc, key);
  if (!p) throw SchemaError(ctx + "." + key + ": missing");
  return *p;
}

double require_number(const nlohmann::json& doc, const char* key, const std::string& ctx) {
  const auto& v = require(doc, key, ctx);
  if (!v.is_number()) throw SchemaError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

long long require_integer(const nlohmann::json& doc, const char* key, const std::string& ctx) {
  const auto& v = require(doc, key, ctx);
  if (!v.is_number_integer()) throw SchemaError(ctx + "." + key + ": expected an integer");
  return v.get<long long>();
}

nlohmann::json complex_json(const Complex& c) {
  return nlohmann::json{{"re", c.real()}, {"im", c.imag()}};
}

}  // namespace

nlohmann::json model_to_json(const AnyModel& model) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  if (const auto* g = std::get_if<NntsModel>(&model)) {
    doc["type"] = "nnts_general";
    nlohmann::json coeffs = nlohmann::json::array();
    for (const auto& c : g->coeffs().values()) coeffs.push_back(complex_json(c));
    doc["payload"] = {{"M", g->degree()}, {"coefficients", std::move(coeffs)}};
  } else if (const auto* s = std::get_if<SymmetricNntsModel>(&model)) {
    doc["type"] = "nnts_symmetric";
    doc["payload"] = {{"M", s->degree()}, {"rho", s->rho()}, {"mu", s->mu()}};
  } else {
    const auto& k = std::get<KSineModel>(model);
    doc["type"] = "ksine";
    doc["payload"] = {{"mu", k.mu()},
                      {"lambda", k.lambda()},
                      {"k_star", k.k_star()},
                      {"base", {{"family", "von_mises"}, {"kappa", k.base().kappa}}}};
  }
  return doc;
}

AnyModel model_from_json(const nlohmann::json& doc, const std::string& ctx) {
  if (!doc.is_object()) throw SchemaError(ctx + ": expected an object");
  const long long version = require_integer(doc, "schema_version", ctx);
  if (version != 1)
    throw SchemaError(ctx + ".schema_version: unsupported version " + std::to_string(version));
  const auto& type = require(doc, "type", ctx);
  if (!type.is_string()) throw SchemaError(ctx + ".type: expected a string");
  const auto& payload = require(doc, "payload", ctx);
  if (!payload.is_object()) throw SchemaError(ctx + ".payload: expected an object");
  const std::string pctx = ctx + ".payload";
  const std::string kind = type.get<std::string>();

  try {
    if (kind == "nnts_general") {
      const long long m = require_integer(payload, "M", pctx);
      if (m < 0) throw SchemaError(pctx + ".M: must be >= 0");
      const auto& arr = require(payload, "coefficients", pctx);
      if (!arr.is_array() || arr.size() != static_cast<std::size_t>(m) + 1)
        throw SchemaError(pctx + ".coefficients: expected an array of M+1 entries");
      std::vector<Complex> c;
      c.reserve(arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string ictx = pctx + ".coefficients[" + std::to_string(i) + "]";
        if (!arr[i].is_object()) throw SchemaError(ictx + ": expected {re, im}");
        c.emplace_back(require_number(arr[i], "re", ictx), require_number(arr[i], "im", ictx));
      }
      return NntsModel(Coefficients(std::move(c)));
    }
    if (kind == "nnts_symmetric") {
      const long long m = require_integer(payload, "M", pctx);
      if (m < 0) throw SchemaError(pctx + ".M: must be >= 0");
      const auto& arr = require(payload, "rho", pctx);
      if (!arr.is_array() || arr.size() != static_cast<std::size_t>(m) + 1)
        throw SchemaError(pctx + ".rho: expected an array of M+1 numbers");
      std::vector<double> rho;
      rho.reserve(arr.size());
      for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
          throw SchemaError(pctx + ".rho[" + std::to_string(i) + "]: expected a number");
        rho.push_back(arr[i].get<double>());
      }
      const double mu = require_number(payload, "mu", pctx);
      if (!(mu >= 0.0 && mu < kTwoPi))
        throw SchemaError(pctx + ".mu: must lie in [0, 2*pi)");
      return SymmetricNntsModel(std::move(rho), mu);
    }
    if (kind == "ksine") {
      const double mu = require_number(payload, "mu", pctx);
      const double lambda = require_number(payload, "lambda", pctx);
      const long long k_star = require_integer(payload, "k_star", pctx);
      const auto& base = require(payload, "base", pctx);
      if (!base.is_object()) throw SchemaError(pctx + ".base: expected an object");
      const auto& family = require(base, "family", pctx + ".base");
      if (!family.is_string() || family.get<std::string>() != "von_mises")
        throw SchemaError(pctx + ".base.family: only 'von_mises' is supported");
      const double kappa = require_number(base, "kappa", pctx + ".base");
      return KSineModel(mu, lambda, static_cast<int>(k_star), VonMisesBase{kappa});
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(pctx + ": " + e.what());
  }
  throw SchemaError(ctx + ".type: unknown model type '" + kind + "'");
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << model_to_json(model).dump(2) << '\n';
}

AnyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  return model_from_json(doc, path.filename().string());
}

nlohmann::json test_result_to_json(const TestResult& result) {
  nlohmann::json doc;
  doc["test"] = std::string(test_kind_name(result.test));
  doc["statistic"] = result.statistic;
  doc["p_value"] = result.p_value;
  if (result.df) doc["df"] = *result.df;
  if (result.k_replicates) doc["k_replicates"] = *result.k_replicates;
  if (result.seed) doc["seed"] = *result.seed;
  if (result.m) doc["m"] = *result.m;
  if (result.mu_hat) doc["mu_hat"] = *result.mu_hat;
  return doc;
}

namespace {

std::string cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

void write_report_csv(const std::vector<ReportRow>& rows, std::ostream& out) {
  out << "m,loglik_general,aic_general,bic_general,loglik_symmetric,aic_symmetric,"
         "bic_symmetric,mu_hat,lr_gs,chi2_p,sk_nnts,best_general,best_symmetric\n";
  for (const auto& r : rows) {
    out << r.m << ',' << cell(r.loglik_general) << ',' << cell(r.aic_general) << ','
        << cell(r.bic_general) << ',' << cell(r.loglik_symmetric) << ','
        << cell(r.aic_symmetric) << ',' << cell(r.bic_symmetric) << ',' << cell(r.mu_hat) << ','
        << cell(r.lr_gs) << ',' << cell(r.chi2_p) << ',' << cell(r.sk) << ','
        << (r.best_general ? 1 : 0) << ',' << (r.best_symmetric ? 1 : 0) << '\n';
  }
}

void write_report_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_report_csv(rows, out);
}

void write_sample_csv(const AngleSample& sample, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "theta_rad\n";
  for (double t : sample.angles()) out << format_double(t) << '\n';
}

void write_density_csv(const NntsModel& model, int grid_points,
                       const std::filesystem::path& path) {
  if (grid_points < 8) throw std::invalid_argument("density grid must have at least 8 points");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "theta,density\n";
  for (int i = 0; i < grid_points; ++i) {
    const double t = kTwoPi * i / grid_points;
    out << format_double(t) << ',' << format_double(density(model, t)) << '\n';
  }
}

ExperimentSpec load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
  if (!doc.is_object()) throw SchemaError("config: expected an object");
  const std::string ctx = "config";

  ExperimentSpec spec;
  spec.master_seed = static_cast<std::uint64_t>(require_integer(doc, "master_seed", ctx));
  spec.n_datasets = static_cast<int>(require_integer(doc, "n_datasets", ctx));
  if (spec.n_datasets < 1) throw SchemaError(ctx + ".n_datasets: must be >= 1");

  const auto& sizes = require(doc, "sample_sizes", ctx);
  if (!sizes.is_array() || sizes.empty())
    throw SchemaError(ctx + ".sample_sizes: expected a non-empty array");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!sizes[i].is_number_integer() || sizes[i].get<long long>() < 1)
      throw SchemaError(ctx + ".sample_sizes[" + std::to_string(i) + "]: expected an integer >= 1");
    spec.sample_sizes.push_back(sizes[i].get<std::size_t>());
  }

  const auto& alphas = require(doc, "alphas", ctx);
  if (!alphas.is_array() || alphas.empty())
    throw SchemaError(ctx + ".alphas: expected a non-empty array");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!alphas[i].is_number())
      throw SchemaError(ctx + ".alphas[" + std::to_string(i) + "]: expected a number");
    const double a = alphas[i].get<double>();
    if (!(a > 0.0 && a < 1.0))
      throw SchemaError(ctx + ".alphas[" + std::to_string(i) + "]: must lie in (0, 1)");
    spec.alphas.push_back(a);
  }

  const auto& gens = require(doc, "generators", ctx);
  if (!gens.is_array() || gens.empty())
    throw SchemaError(ctx + ".generators: expected a non-empty array");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const std::string gctx = ctx + ".generators[" + std::to_string(i) + "]";
    if (!gens[i].is_object()) throw SchemaError(gctx + ": expected an object");
    const auto& id = require(gens[i], "id", gctx);
    if (!id.is_string()) throw SchemaError(gctx + ".id: expected a string");
    AnyModel model = [&]() -> AnyModel {
      if (const auto* file = find(gens[i], "file")) {
        if (!file->is_string()) throw SchemaError(gctx + ".file: expected a string path");
        return load_model(path.parent_path() / file->get<std::string>());
      }
      return model_from_json(require(gens[i], "model", gctx), gctx + ".model");
    }();
    spec.generators.push_back(GeneratorEntry{
        id.get<std::string>(),
        std::visit([](auto m) { return GeneratorModel(std::move(m)); }, std::move(model))});
  }

  const auto& tests = require(doc, "tests", ctx);
  if (!tests.is_array() || tests.empty())
    throw SchemaError(ctx + ".tests: expected a non-empty array");
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const std::string tctx = ctx + ".tests[" + std::to_string(i) + "]";
    if (!tests[i].is_object()) throw SchemaError(tctx + ": expected an object");
    const auto& kind = require(tests[i], "kind", tctx);
    if (!kind.is_string()) throw SchemaError(tctx + ".kind: expected a string");
    TestConfig cfg;
    const std::string ks = kind.get<std::string>();
    if (ks == "lr-asymptotic")
      cfg.kind = TestKind::lr_asymptotic;
    else if (ks == "lr-bootstrap")
      cfg.kind = TestKind::lr_bootstrap;
    else if (ks == "b2-bootstrap")
      cfg.kind = TestKind::b2_bootstrap;
    else
      throw SchemaError(tctx + ".kind: unknown test '" + ks + "'");
    if (cfg.kind != TestKind::b2_bootstrap) {
      cfg.m = static_cast<int>(require_integer(tests[i], "m", tctx));
      if (cfg.m < 2) throw SchemaError(tctx + ".m: LR tests require m >= 2");
    }
    if (cfg.kind != TestKind::lr_asymptotic) {
      if (const auto* k = find(tests[i], "k")) {
        if (!k->is_number_integer()) throw SchemaError(tctx + ".k: expected an integer");
        cfg.k_replicates = k->get<int>();
        if (cfg.k_replicates < 99) throw SchemaError(tctx + ".k: must be >= 99");
      }
    }
    spec.tests.push_back(cfg);
  }

  if (const auto* fo = find(doc, "fit_options")) {
    const std::string fctx = ctx + ".fit_options";
    if (!fo->is_object()) throw SchemaError(fctx + ": expected an object");
    if (const auto* v = find(*fo, "max_iters")) spec.fit_options.max_iters = v->get<int>();
    if (const auto* v = find(*fo, "grad_tol")) spec.fit_options.grad_tol = v->get<double>();
    if (const auto* v = find(*fo, "loglik_tol")) spec.fit_options.loglik_tol = v->get<double>();
    if (const auto* v = find(*fo, "mu_grid_points"))
      spec.fit_options.mu_grid_points = v->get<int>();
    if (const auto* v = find(*fo, "n_restarts")) spec.fit_options.n_restarts = v->get<int>();
  }
  return spec;
}

void write_rejection_csv(const RejectionTable& table, const std::vector<double>& alphas,
                         int n_datasets, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "generator,test,m,n,n_datasets,n_failed,alpha,rejections,rate\n";
  for (const auto& c : table.cells) {
    for (double a : alphas) {
      out << c.generator << ',' << c.test << ',' << c.m << ',' << c.n << ',' << n_datasets << ','
          << c.n_failed << ',' << format_double(a) << ',' << c.rejections(a) << ','
          << format_double(c.rate(a)) << '\n';
    }
  }
}

nlohmann::json audit_to_json(const RejectionTable& table, const ExperimentSpec& spec) {
  nlohmann::json doc;
  doc["schema_version"] = 1;
  doc["master_seed"] = spec.master_seed;
  doc["n_datasets"] = spec.n_datasets;
  doc["alphas"] = spec.alphas;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : table.cells) {
    cells.push_back({{"generator", c.generator},
                     {"test", c.test},
                     {"m", c.m},
                     {"n", c.n},
                     {"n_failed", c.n_failed},
                     {"p_values", c.p_values}});
  }
  doc["cells"] = std::move(cells);
  return doc;
}

}  // namespace nnts
