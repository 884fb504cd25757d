#ifndef BLOCHSCAT_HARNESS_HPP
#define BLOCHSCAT_HARNESS_HPP

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <vector>

#include "blochscat/geometry.hpp"
#include "blochscat/incident.hpp"
#include "blochscat/mesh.hpp"
#include "blochscat/quadrature.hpp"

namespace blochscat {

struct ExperimentConfig {
  int example = 1;
  double k = 0.0;    // 0 -> example default (sqrt 2 odd, 10 even)
  double H = 3.0;
  double p = 0.5;
  int N = 20;
  int M = 10;
  double eps = 0.0;  // mesh width target, used when n1 or n2 is 0
  int n1 = 0, n2 = 0;
  int dtn_order = 0;  // 0 -> default
  int samples = 512;  // points on Gamma_h = [-pi, pi] x {2.9}
  double gamma_h_height = 2.9;
  int threads = 1;
  std::string out_dir = "out";
  std::string cache_dir;  // per-alpha trace cache; empty disables

  double resolved_k() const;
  void validate() const;
};

// Plain-text key=value config files.
ExperimentConfig read_config(const std::string& path);
void apply_config_line(ExperimentConfig& config, const std::string& line);
void write_config(const ExperimentConfig& config, std::ostream& os);

// Samples of a field on a horizontal segment, uniform in x1 over [-pi, pi].
struct FieldSamples {
  std::vector<double> x1;
  double x2 = 0.0;
  Eigen::VectorXcd values;
};

FieldSamples make_sample_grid(int count, double x2);

// Plot-ready subsample of the cell field on a fixed structured grid.
struct CellField {
  int nx = 0, ny = 0;
  std::vector<Eigen::Vector2d> points;  // row-major, x1 fastest
  Eigen::VectorXcd values;
};

struct RunResult {
  ExperimentConfig config;  // with k, n1, n2, dtn_order resolved
  QuadratureScheme scheme;
  FieldSamples gamma_h;
  CellField cell;
  double seconds = 0.0;
  long factorizations = 0;
  long cache_hits = 0;
};

// Full pipeline for one parameter set: geometry, mesh, quadrature scheme,
// per-alpha cell solves, inverse Bloch transform onto Gamma_h.
RunResult run_example(const ExperimentConfig& config);

// Exact solution -u^i on Gamma_h, available for Examples 1-2.
FieldSamples exact_solution(const ExperimentConfig& config);

// Relative discrete L^2(Gamma_h) error on a shared uniform grid (trapezoid).
double relative_error(const FieldSamples& u, const FieldSamples& u_ref);

enum class FitMode { AlgebraicInEps, ExponentialInM, ExponentialInN };

struct FitResult {
  double slope = 0.0;     // d log(err) / d log(x) or d ln(err) / d x
  double residual = 0.0;  // RMS residual of the least-squares fit
};

FitResult fit_convergence(const std::vector<double>& xs,
                          const std::vector<double>& errs, FitMode mode);

struct ErrorReport {
  std::string sweep_param;  // "eps", "M", "N", or empty for a single run
  std::vector<double> values;
  std::vector<double> errors;
  std::vector<double> runtimes;
  FitResult fit;
};

// errors.csv, quadrature_nodes.csv, gamma_h_field.csv, cell_field.csv.
void emit_outputs(const ErrorReport& report, const RunResult& result,
                  const std::string& out_dir);

}  // namespace blochscat

#endif  // BLOCHSCAT_HARNESS_HPP
