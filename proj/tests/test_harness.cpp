#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "blochscat/harness.hpp"
#include "doctest.h"

using namespace blochscat;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.example = 1;
  cfg.n1 = 16;
  cfg.n2 = 8;
  cfg.N = 3;
  cfg.M = 2;
  cfg.samples = 33;
  return cfg;
}

}  // namespace

TEST_CASE("relative error: identity, doubling, constant shift") {
  FieldSamples ref = make_sample_grid(3, 2.9);
  ref.values << Complex{1.0, 0.0}, Complex{2.0, 0.0}, Complex{3.0, 0.0};
  FieldSamples u = ref;
  CHECK(relative_error(u, ref) == 0.0);
  u.values = 2.0 * ref.values;
  CHECK(relative_error(u, ref) == doctest::Approx(1.0).epsilon(1e-14));
  // Constant shift c: trapezoid norms give |c| sqrt(2) / 3 for values 1,2,3.
  u = ref;
  u.values.array() += Complex{0.3, 0.0};
  CHECK(relative_error(u, ref) ==
        doctest::Approx(0.3 * std::sqrt(2.0) / 3.0).epsilon(1e-14));

  FieldSamples zero = ref;
  zero.values.setZero();
  CHECK_THROWS_AS(relative_error(u, zero), std::invalid_argument);
  FieldSamples other = make_sample_grid(5, 2.9);
  CHECK_THROWS_AS(relative_error(other, ref), std::invalid_argument);
}

TEST_CASE("convergence fits: algebraic and semi-log slopes") {
  FitResult fit = fit_convergence({0.04, 0.02, 0.01}, {1e-2, 2.5e-3, 6.25e-4},
                                  FitMode::AlgebraicInEps);
  CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(fit.residual <= 1e-12);

  // Table 1, k = sqrt(2) row.
  fit = fit_convergence({0.04, 0.02, 0.01, 0.005},
                        {3.5e-4, 8.8e-5, 2.2e-5, 6.2e-6},
                        FitMode::AlgebraicInEps);
  CHECK(fit.slope == doctest::Approx(1.94).epsilon(0.01));

  // Table 4, Example 3 row: semi-log (natural log) slope about -4.4.
  fit = fit_convergence({2.0, 3.0, 4.0, 5.0}, {7.4e-4, 9.0e-6, 1.0e-7, 1.6e-9},
                        FitMode::ExponentialInM);
  CHECK(fit.slope == doctest::Approx(-4.4).epsilon(0.02));

  CHECK_THROWS_AS(fit_convergence({1.0, 2.0}, {1.0, 2.0}, FitMode::ExponentialInN),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      fit_convergence({1.0, 2.0, 3.0}, {1.0, 0.0, 1.0}, FitMode::ExponentialInN),
      std::invalid_argument);
}

TEST_CASE("config files round-trip") {
  ExperimentConfig cfg = tiny_config();
  cfg.k = 1.75;
  cfg.p = 0.45;
  cfg.out_dir = "somewhere";
  cfg.cache_dir = "cachedir";
  std::ostringstream os;
  write_config(cfg, os);
  ExperimentConfig back;
  std::istringstream is(os.str());
  std::string line;
  while (std::getline(is, line)) apply_config_line(back, line);
  CHECK(back.example == cfg.example);
  CHECK(back.k == cfg.k);
  CHECK(back.p == cfg.p);
  CHECK(back.N == cfg.N);
  CHECK(back.M == cfg.M);
  CHECK(back.n1 == cfg.n1);
  CHECK(back.n2 == cfg.n2);
  CHECK(back.samples == cfg.samples);
  CHECK(back.out_dir == cfg.out_dir);
  CHECK(back.cache_dir == cfg.cache_dir);

  ExperimentConfig c2;
  apply_config_line(c2, "  # just a comment");
  apply_config_line(c2, "");
  apply_config_line(c2, "M = 7  # trailing comment");
  CHECK(c2.M == 7);
  CHECK_THROWS_AS(apply_config_line(c2, "what"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_line(c2, "unknown=3"), std::invalid_argument);
  CHECK_THROWS_AS(apply_config_line(c2, "M=abc"), std::invalid_argument);
}

TEST_CASE("config validation") {
  ExperimentConfig cfg = tiny_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(tiny_config().resolved_k() == doctest::Approx(std::sqrt(2.0)));
  cfg.example = 2;
  CHECK(cfg.resolved_k() == doctest::Approx(10.0));
  cfg.example = 9;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = tiny_config();
  cfg.n1 = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);  // no eps either
  cfg.eps = 0.25;
  CHECK_NOTHROW(cfg.validate());
  cfg.p = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("tiny Example 1 run approximates the exact solution") {
  ExperimentConfig cfg = tiny_config();
  cfg.n1 = 64;
  cfg.n2 = 20;
  cfg.N = 10;
  cfg.M = 5;
  cfg.samples = 65;
  RunResult result = run_example(cfg);
  CHECK(result.gamma_h.values.size() == 65);
  CHECK(result.cell.values.size() == std::size_t(result.cell.nx) * result.cell.ny);
  double err = relative_error(result.gamma_h, exact_solution(cfg));
  CHECK(err <= 0.02);
  CHECK(err > 0.0);
}

TEST_CASE("thread count does not change the result") {
  // Workers reuse factorizations across their own alpha chunks, so the
  // solutions agree to the solver tolerance rather than bitwise.
  ExperimentConfig cfg = tiny_config();
  RunResult serial = run_example(cfg);
  cfg.threads = 4;
  RunResult parallel = run_example(cfg);
  REQUIRE(serial.gamma_h.values.size() == parallel.gamma_h.values.size());
  double scale = serial.gamma_h.values.norm();
  CHECK((serial.gamma_h.values - parallel.gamma_h.values).norm() <=
        1e-8 * scale);
  CHECK((serial.cell.values - parallel.cell.values).norm() <=
        1e-8 * serial.cell.values.norm());
}

TEST_CASE("alpha cache round-trips a run") {
  fs::path tmp = fs::temp_directory_path() / "blochscat_cache_test";
  fs::remove_all(tmp);
  ExperimentConfig cfg = tiny_config();
  cfg.cache_dir = tmp.string();
  RunResult first = run_example(cfg);
  CHECK(first.cache_hits == 0);
  RunResult second = run_example(cfg);
  CHECK(second.cache_hits > 0);
  CHECK(second.factorizations == 0);
  for (Eigen::Index i = 0; i < first.gamma_h.values.size(); ++i)
    CHECK(first.gamma_h.values[i] == second.gamma_h.values[i]);
  fs::remove_all(tmp);
}

TEST_CASE("emit_outputs writes the four CSV files with exact round-trip") {
  fs::path tmp = fs::temp_directory_path() / "blochscat_emit_test";
  fs::remove_all(tmp);
  ExperimentConfig cfg = tiny_config();
  RunResult result = run_example(cfg);
  ErrorReport report;
  report.sweep_param = "N";
  report.values = {3.0, 4.0, 5.0};
  report.errors = {1.0 / 3.0, 1e-7, 2.5e-13};
  report.runtimes = {0.125, 0.25, 0.5};
  emit_outputs(report, result, tmp.string());

  std::ifstream errs(tmp / "errors.csv");
  std::string header;
  std::getline(errs, header);
  CHECK(header == "sweep_param,value,err,runtime_seconds");
  for (int i = 0; i < 3; ++i) {
    std::string line;
    REQUIRE(std::getline(errs, line));
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::string param;
    double v, e, t;
    row >> param >> v >> e >> t;
    CHECK(param == "N");
    CHECK(v == report.values[i]);
    CHECK(e == report.errors[i]);
    CHECK(t == report.runtimes[i]);
  }

  std::string gamma = slurp(tmp / "gamma_h_field.csv");
  std::size_t rows = std::count(gamma.begin(), gamma.end(), '\n');
  CHECK(rows == std::size_t(cfg.samples) + 1);  // header + samples

  CHECK(fs::exists(tmp / "quadrature_nodes.csv"));
  CHECK(fs::exists(tmp / "cell_field.csv"));
  CHECK(fs::exists(tmp / "config.txt"));
  std::string cell = slurp(tmp / "cell_field.csv");
  CHECK(std::count(cell.begin(), cell.end(), '\n') ==
        long(result.cell.values.size()) + 1);
  fs::remove_all(tmp);
}
