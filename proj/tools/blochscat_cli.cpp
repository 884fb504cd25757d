#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blochscat/harness.hpp"
#include "blochscat/verify.hpp"

namespace {

using namespace blochscat;

struct CliOverrides {
  std::string config_path;
  int example = 0, N = 0, M = 0, n1 = 0, n2 = 0, dtn_order = 0, samples = 0,
      threads = 0;
  double k = 0.0, p = 0.0, eps = 0.0;
  std::string out, cache;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--example", o.example, "example number 1..6");
  cmd->add_option("--k", o.k, "wavenumber (default: sqrt(2) odd, 10 even)");
  cmd->add_option("--p", o.p, "grading ratio in (0,1)");
  cmd->add_option("--N", o.N, "graded subintervals per singular endpoint");
  cmd->add_option("--M", o.M, "Gauss points per subinterval");
  cmd->add_option("--n1", o.n1, "horizontal grid intervals");
  cmd->add_option("--n2", o.n2, "vertical grid intervals");
  cmd->add_option("--eps", o.eps, "target mesh width (alternative to n1/n2)");
  cmd->add_option("--dtn-order", o.dtn_order, "DtN truncation order");
  cmd->add_option("--samples", o.samples, "sample count on Gamma_h");
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--cache", o.cache, "per-alpha solve cache directory");
}

ExperimentConfig build_config(const CLI::App* cmd, const CliOverrides& o) {
  ExperimentConfig cfg;
  if (cmd->count("--config")) cfg = read_config(o.config_path);
  if (cmd->count("--example")) cfg.example = o.example;
  if (cmd->count("--k")) cfg.k = o.k;
  if (cmd->count("--p")) cfg.p = o.p;
  if (cmd->count("--N")) cfg.N = o.N;
  if (cmd->count("--M")) cfg.M = o.M;
  if (cmd->count("--n1")) cfg.n1 = o.n1;
  if (cmd->count("--n2")) cfg.n2 = o.n2;
  if (cmd->count("--eps")) cfg.eps = o.eps;
  if (cmd->count("--dtn-order")) cfg.dtn_order = o.dtn_order;
  if (cmd->count("--samples")) cfg.samples = o.samples;
  if (cmd->count("--threads")) cfg.threads = o.threads;
  if (cmd->count("--out")) cfg.out_dir = o.out;
  if (cmd->count("--cache")) cfg.cache_dir = o.cache;
  return cfg;
}

FieldSamples reference_solution(const ExperimentConfig& cfg, int ref_N,
                                int ref_M, double ref_eps) {
  if (cfg.example <= 2) {
    ExperimentConfig probe = cfg;
    // Grid resolution on Gamma_h is fixed by `samples`; only the k matters.
    return exact_solution(probe);
  }
  ExperimentConfig ref = cfg;
  ref.N = ref_N;
  ref.M = ref_M;
  if (ref_eps > 0.0) {
    ref.eps = ref_eps;
    ref.n1 = ref.n2 = 0;
  }
  return run_example(ref).gamma_h;
}

int cmd_run(const CLI::App* cmd, const CliOverrides& o) {
  ExperimentConfig cfg = build_config(cmd, o);
  RunResult result = run_example(cfg);
  ErrorReport report;
  report.values = {cfg.eps > 0.0 ? cfg.eps : double(result.config.n1)};
  report.runtimes = {result.seconds};
  if (cfg.example <= 2) {
    report.errors = {relative_error(result.gamma_h, exact_solution(cfg))};
    std::printf("example=%d err=%.6e runtime=%.2fs\n", cfg.example,
                report.errors[0], result.seconds);
  } else {
    report.errors = {0.0};
    std::printf("example=%d runtime=%.2fs (no closed-form reference)\n",
                cfg.example, result.seconds);
  }
  emit_outputs(report, result, result.config.out_dir);
  std::printf("outputs written to %s\n", result.config.out_dir.c_str());
  return 0;
}

int cmd_sweep(const CLI::App* cmd, const CliOverrides& o,
              const std::string& param, const std::vector<double>& values,
              int ref_N, int ref_M, double ref_eps) {
  ExperimentConfig base = build_config(cmd, o);
  FieldSamples ref = reference_solution(base, ref_N, ref_M, ref_eps);

  ErrorReport report;
  report.sweep_param = param;
  RunResult last;
  for (double v : values) {
    ExperimentConfig cfg = base;
    if (param == "eps") {
      cfg.eps = v;
      cfg.n1 = cfg.n2 = 0;
    } else if (param == "M") {
      cfg.M = int(std::lround(v));
    } else {
      cfg.N = int(std::lround(v));
    }
    last = run_example(cfg);
    double err = relative_error(last.gamma_h, ref);
    report.values.push_back(v);
    report.errors.push_back(err);
    report.runtimes.push_back(last.seconds);
    std::printf("%s=%g err=%.6e runtime=%.2fs\n", param.c_str(), v, err,
                last.seconds);
  }
  if (report.values.size() >= 3) {
    FitMode mode = param == "eps" ? FitMode::AlgebraicInEps
                   : param == "M" ? FitMode::ExponentialInM
                                  : FitMode::ExponentialInN;
    report.fit = fit_convergence(report.values, report.errors, mode);
    std::printf("fitted slope=%.4f residual=%.4f\n", report.fit.slope,
                report.fit.residual);
  }
  emit_outputs(report, last, last.config.out_dir);
  std::printf("outputs written to %s\n", last.config.out_dir.c_str());
  return 0;
}

int cmd_verify() {
  auto results = run_property_suites();
  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("[%s] %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all_ok = all_ok && r.passed;
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bloch-transform solver for scattering by periodic surfaces"};
  app.require_subcommand(1);

  CliOverrides run_opts, sweep_opts;
  CLI::App* run = app.add_subcommand("run", "solve one parameter set");
  add_common_flags(run, run_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep with error fit");
  add_common_flags(sweep, sweep_opts);
  std::string sweep_param;
  std::vector<double> sweep_values;
  int ref_N = 20, ref_M = 10;
  double ref_eps = 0.0;
  sweep->add_option("--sweep-param", sweep_param, "eps, M, or N")
      ->required()
      ->check(CLI::IsMember({"eps", "M", "N"}));
  sweep->add_option("--values", sweep_values, "swept values")->required();
  sweep->add_option("--ref-N", ref_N, "reference solution N (default 20)");
  sweep->add_option("--ref-M", ref_M, "reference solution M (default 10)");
  sweep->add_option("--ref-eps", ref_eps,
                    "reference mesh width (default: base config mesh)");

  CLI::App* verify = app.add_subcommand("verify", "run the property suites");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run, run_opts);
    if (sweep->parsed())
      return cmd_sweep(sweep, sweep_opts, sweep_param, sweep_values, ref_N,
                       ref_M, ref_eps);
    if (verify->parsed()) return cmd_verify();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
