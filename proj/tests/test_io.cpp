#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "nnts/io.hpp"
#include "oracles.hpp"

using namespace nnts;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("nnts_io_test_" + std::to_string(static_cast<unsigned>(std::rand())));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const TempDir& dir, const std::string& name, const std::string& body) {
  const fs::path p = dir.path / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_CASE("parse_angles: unit conversions") {
  TempDir dir;
  const auto deg = write_file(dir, "deg.csv", "90\n370\n");
  const AngleSample sd = parse_angles(deg, SourceUnit::degrees);
  REQUIRE(sd.size() == 2);
  CHECK(sd.angles()[0] == doctest::Approx(kTwoPi / 4).epsilon(1e-14));
  CHECK(sd.angles()[1] == doctest::Approx(10.0 * kTwoPi / 360.0).epsilon(1e-12));

  const auto hrs = write_file(dir, "hrs.csv", "23\n0\n12\n");
  const AngleSample sh = parse_angles(hrs, SourceUnit::hours24);
  CHECK(sh.angles()[0] == doctest::Approx(23.0 * kTwoPi / 24.0).epsilon(1e-13));
  CHECK(sh.angles()[1] == 0.0);
  CHECK(sh.angles()[2] == doctest::Approx(kTwoPi / 2).epsilon(1e-14));

  const auto rad = write_file(dir, "rad.csv", "1.5\n\n \n2.5\n");
  CHECK(parse_angles(rad, SourceUnit::radians).size() == 2);  // blanks skipped
}

TEST_CASE("parse_angles: columns, headers, and errors") {
  TempDir dir;
  const auto named = write_file(dir, "named.csv",
                                "id,direction_deg,weight\n1,90,0.5\n2,180,0.7\n3,270,0.2\n");
  const AngleSample byname = parse_angles(named, SourceUnit::degrees, std::string("direction_deg"));
  REQUIRE(byname.size() == 3);
  CHECK(byname.angles()[1] == doctest::Approx(kTwoPi / 2).epsilon(1e-14));

  const AngleSample byindex = parse_angles(named, SourceUnit::degrees, std::string("1"));
  REQUIRE(byindex.size() == 3);  // header auto-skipped
  CHECK(byindex.angles()[2] == doctest::Approx(3 * kTwoPi / 4).epsilon(1e-14));

  CHECK_THROWS_AS(parse_angles(named, SourceUnit::degrees, std::string("absent")), DataError);

  const auto bad = write_file(dir, "bad.csv", "1.0\n2.0\nxyz\n4.0\n");
  try {
    parse_angles(bad, SourceUnit::radians);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);  // line number
  }

  const auto nan_file = write_file(dir, "nan.csv", "1.0\nnan\n");
  CHECK_THROWS_AS(parse_angles(nan_file, SourceUnit::radians), DataError);

  const auto empty = write_file(dir, "empty.csv", "\n\n");
  CHECK_THROWS_AS(parse_angles(empty, SourceUnit::radians), DataError);
  CHECK_THROWS_AS(parse_angles(dir.path / "missing.csv", SourceUnit::radians), DataError);

  const auto narrow = write_file(dir, "narrow.csv", "1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(parse_angles(narrow, SourceUnit::radians, std::string("1")), DataError);
}

TEST_CASE("model JSON round-trips are exact") {
  TempDir dir;
  RngStream rng(81);

  const NntsModel g = oracle::random_model(5, rng);
  const fs::path gp = dir.path / "general.json";
  save_model(AnyModel(g), gp);
  const AnyModel gl = load_model(gp);
  REQUIRE(std::holds_alternative<NntsModel>(gl));
  CHECK(std::get<NntsModel>(gl).coeffs().values() == g.coeffs().values());  // bitwise

  const SymmetricNntsModel s = oracle::random_symmetric_model(4, rng);
  const fs::path sp = dir.path / "symmetric.json";
  save_model(AnyModel(s), sp);
  const AnyModel sl = load_model(sp);
  REQUIRE(std::holds_alternative<SymmetricNntsModel>(sl));
  CHECK(std::get<SymmetricNntsModel>(sl).rho() == s.rho());
  CHECK(std::get<SymmetricNntsModel>(sl).mu() == s.mu());

  const KSineModel k(0.5, -0.4, 3, VonMisesBase{1.7});
  const fs::path kp = dir.path / "ksine.json";
  save_model(AnyModel(k), kp);
  const AnyModel kl = load_model(kp);
  REQUIRE(std::holds_alternative<KSineModel>(kl));
  CHECK(std::get<KSineModel>(kl).mu() == k.mu());
  CHECK(std::get<KSineModel>(kl).lambda() == k.lambda());
  CHECK(std::get<KSineModel>(kl).k_star() == 3);
  CHECK(std::get<KSineModel>(kl).base().kappa == 1.7);
}

TEST_CASE("model JSON validation names the failing constraint") {
  TempDir dir;
  const auto bad_norm = write_file(
      dir, "badnorm.json",
      R"({"schema_version":1,"type":"nnts_general","payload":{"M":1,
          "coefficients":[{"re":0.8,"im":0.0},{"re":0.5,"im":0.0}]}})");
  try {
    load_model(bad_norm);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("sum to 1") != std::string::npos);
  }

  const auto bad_mu = write_file(dir, "badmu.json",
                                 R"({"schema_version":1,"type":"nnts_symmetric",
                                     "payload":{"M":1,"rho":[0.6,0.8],"mu":7.0}})");
  CHECK_THROWS_AS(load_model(bad_mu), SchemaError);

  const auto bad_type = write_file(dir, "badtype.json",
                                   R"({"schema_version":1,"type":"wrapped_cauchy","payload":{}})");
  CHECK_THROWS_AS(load_model(bad_type), SchemaError);

  const auto bad_version = write_file(dir, "badver.json",
                                      R"({"schema_version":2,"type":"ksine","payload":{}})");
  CHECK_THROWS_AS(load_model(bad_version), SchemaError);

  const auto bad_lambda = write_file(dir, "badlambda.json",
                                     R"({"schema_version":1,"type":"ksine","payload":
                                         {"mu":0.0,"lambda":1.2,"k_star":2,
                                          "base":{"family":"von_mises","kappa":1.0}}})");
  CHECK_THROWS_AS(load_model(bad_lambda), SchemaError);

  const auto not_json = write_file(dir, "nope.json", "{{{{");
  CHECK_THROWS_AS(load_model(not_json), DataError);
}

TEST_CASE("format_double round-trips arbitrary doubles") {
  RngStream rng(82);
  for (int i = 0; i < 1000; ++i) {
    double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
    const std::string s = format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-183.78770664093453) == "-183.78770664093453");
}

TEST_CASE("report CSV: information criteria recompute exactly from the columns") {
  TempDir dir;
  std::vector<ReportRow> rows;
  ReportRow r;
  r.m = 3;
  r.loglik_general = -133.42448;
  r.aic_general = aic_of(-133.42448, 6);
  r.bic_general = bic_of(-133.42448, 6, 100);
  rows.push_back(r);
  const fs::path p = dir.path / "report.csv";
  write_report_csv(rows, p);

  std::ifstream in(p);
  std::string header, line;
  std::getline(in, header);
  CHECK(header ==
        "m,loglik_general,aic_general,bic_general,loglik_symmetric,aic_symmetric,"
        "bic_symmetric,mu_hat,lr_gs,chi2_p,sk_nnts,best_general,best_symmetric");
  std::getline(in, line);
  // parse the three numeric columns back
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) fields.push_back(tok);
  const double ll = std::strtod(fields[1].c_str(), nullptr);
  const double aic = std::strtod(fields[2].c_str(), nullptr);
  const double bic = std::strtod(fields[3].c_str(), nullptr);
  CHECK(aic == aic_of(ll, 6));
  CHECK(bic == bic_of(ll, 6, 100));
}

TEST_CASE("test results serialize with exactly the applicable fields") {
  TestResult asym;
  asym.test = TestKind::lr_asymptotic;
  asym.statistic = 1.937;
  asym.df = 3;
  asym.p_value = 0.585;
  asym.m = 4;
  asym.mu_hat = 3.198;
  const auto ja = test_result_to_json(asym);
  CHECK(ja["test"] == "lr-asymptotic");
  CHECK(ja.contains("df"));
  CHECK_FALSE(ja.contains("k_replicates"));
  CHECK_FALSE(ja.contains("seed"));

  TestResult boot;
  boot.test = TestKind::b2_bootstrap;
  boot.statistic = -0.02;
  boot.p_value = 0.493;
  boot.k_replicates = 999;
  boot.seed = 7;
  const auto jb = test_result_to_json(boot);
  CHECK(jb["test"] == "b2-bootstrap");
  CHECK_FALSE(jb.contains("df"));
  CHECK(jb.contains("k_replicates"));
  CHECK(jb.contains("seed"));
}

TEST_CASE("experiment config parsing and schema errors with field paths") {
  TempDir dir;
  RngStream rng(83);
  const fs::path model_path = dir.path / "gen.json";
  save_model(AnyModel(oracle::random_symmetric_model(2, rng)), model_path);

  const auto good = write_file(dir, "good.json", R"({
    "master_seed": 31337,
    "n_datasets": 10,
    "sample_sizes": [50, 100],
    "alphas": [0.1, 0.05],
    "generators": [
      {"id": "inline", "model": {"schema_version":1,"type":"ksine","payload":
        {"mu":0.0,"lambda":0.6,"k_star":3,"base":{"family":"von_mises","kappa":1.0}}}},
      {"id": "fromfile", "file": "gen.json"}
    ],
    "tests": [
      {"kind": "lr-asymptotic", "m": 2},
      {"kind": "lr-bootstrap", "m": 2, "k": 99},
      {"kind": "b2-bootstrap", "k": 199}
    ],
    "fit_options": {"n_restarts": 2}
  })");
  const ExperimentSpec spec = load_experiment_config(good);
  CHECK(spec.master_seed == 31337);
  CHECK(spec.generators.size() == 2);
  CHECK(spec.tests.size() == 3);
  CHECK(spec.tests[1].k_replicates == 99);
  CHECK(spec.fit_options.n_restarts == 2);
  CHECK(std::holds_alternative<SymmetricNntsModel>(spec.generators[1].model));

  const auto no_gens = write_file(dir, "nogens.json", R"({
    "master_seed": 1, "n_datasets": 10, "sample_sizes": [50], "alphas": [0.1],
    "generators": [], "tests": [{"kind": "b2-bootstrap"}]
  })");
  try {
    load_experiment_config(no_gens);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("generators") != std::string::npos);
  }

  const auto bad_kind = write_file(dir, "badkind.json", R"({
    "master_seed": 1, "n_datasets": 10, "sample_sizes": [50], "alphas": [0.1],
    "generators": [{"id":"g","file":"gen.json"}],
    "tests": [{"kind": "wilcoxon"}]
  })");
  try {
    load_experiment_config(bad_kind);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("tests[0].kind") != std::string::npos);
  }
}

TEST_CASE("sample and density CSV writers") {
  TempDir dir;
  const AngleSample s({0.5, 1.5, 2.5});
  const fs::path sp = dir.path / "sample.csv";
  write_sample_csv(s, sp);
  std::ifstream in(sp);
  std::string line;
  std::getline(in, line);
  CHECK(line == "theta_rad");
  std::getline(in, line);
  CHECK(line == "0.5");

  const fs::path dp = dir.path / "density.csv";
  write_density_csv(NntsModel::uniform(), 16, dp);
  std::ifstream din(dp);
  std::getline(din, line);
  CHECK(line == "theta,density");
  std::getline(din, line);
  CHECK(line.find("0,") == 0);
  const double v = std::strtod(line.substr(2).c_str(), nullptr);
  CHECK(v == doctest::Approx(1.0 / kTwoPi).epsilon(1e-15));

  CHECK_THROWS_AS(write_density_csv(NntsModel::uniform(), 4, dp), std::invalid_argument);
}
