#ifndef BLOCHSCAT_GEOMETRY_HPP
#define BLOCHSCAT_GEOMETRY_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace blochscat {

// 2pi-periodic surface profile stored as trigonometric coefficients,
//   zeta(t) = c0 + sum_m a_m sin(m t) + b_m cos(m t),
// together with the artificial boundary height H of the strip
// Omega = { zeta(x1) < x2 < H }.
struct PeriodicSurface {
  double c0 = 0.0;
  std::vector<double> sin_coeffs;  // a_m, m = 1..
  std::vector<double> cos_coeffs;  // b_m, m = 1..
  double H = 0.0;

  double height(double t) const;
  double slope(double t) const;

  // c0 + sum(|a_m| + |b_m|), an analytic upper bound for max zeta.
  double coefficient_bound() const;
  double max_height() const;  // dense sampling plus local refinement
  double min_height() const;

  // Area of the strip over one period; sin/cos terms integrate to zero.
  double cell_area() const { return 2.0 * M_PI * (H - c0); }

  // Throws if max zeta >= H (strict separation required).
  void validate() const;
};

// The surface used in all of the experiments:
//   zeta(t) = 3/2 + sin(t)/3 - cos(2t)/4, H = 3.
PeriodicSurface paper_surface(double H = 3.0);
PeriodicSurface flat_surface(double height, double H);

struct WaveParameters {
  double k = 0.0;
  double k_under = 0.0;                 // min_n |n - k|
  std::vector<double> exceptional_set;  // sorted, within [-k_under, 1-k_under]
};

double compute_underline_k(double k);
std::vector<double> compute_exceptional_set(double k);
WaveParameters make_wave_parameters(double k);

enum class SingularEnd { Left, Right };

struct Interval {
  double a0 = 0.0;
  double a1 = 0.0;
  SingularEnd singular_end = SingularEnd::Left;
  double length() const { return a1 - a0; }
};

struct IntervalSplit {
  std::vector<Interval> intervals;
};

// Split [-k_under, 1-k_under] so that each subinterval carries exactly one
// square-root singularity at its designated end.
IntervalSplit decompose_intervals(const WaveParameters& params);

}  // namespace blochscat

#endif  // BLOCHSCAT_GEOMETRY_HPP
