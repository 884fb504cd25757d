#include "blochscat/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace blochscat {

double PeriodicSurface::height(double t) const {
  double v = c0;
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m)
    v += sin_coeffs[m] * std::sin(double(m + 1) * t);
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m)
    v += cos_coeffs[m] * std::cos(double(m + 1) * t);
  return v;
}

double PeriodicSurface::slope(double t) const {
  double v = 0.0;
  for (std::size_t m = 0; m < sin_coeffs.size(); ++m)
    v += sin_coeffs[m] * double(m + 1) * std::cos(double(m + 1) * t);
  for (std::size_t m = 0; m < cos_coeffs.size(); ++m)
    v -= cos_coeffs[m] * double(m + 1) * std::sin(double(m + 1) * t);
  return v;
}

double PeriodicSurface::coefficient_bound() const {
  double v = c0;
  for (double a : sin_coeffs) v += std::abs(a);
  for (double b : cos_coeffs) v += std::abs(b);
  return v;
}

namespace {

template <typename F>
double sampled_extremum(const F& f, bool maximize) {
  constexpr int n = 1 << 13;
  double best_t = 0.0;
  double best = f(0.0);
  for (int i = 1; i < n; ++i) {
    double t = -M_PI + 2.0 * M_PI * i / n;
    double v = f(t);
    if (maximize ? (v > best) : (v < best)) {
      best = v;
      best_t = t;
    }
  }
  // Golden-section refinement around the best sample.
  double lo = best_t - 2.0 * M_PI / n, hi = best_t + 2.0 * M_PI / n;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80; ++it) {
    bool keep_left = maximize ? (f1 > f2) : (f1 < f2);
    if (keep_left) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = f(x2);
    }
  }
  double v = f(0.5 * (lo + hi));
  return maximize ? std::max(best, v) : std::min(best, v);
}

}  // namespace

double PeriodicSurface::max_height() const {
  return sampled_extremum([this](double t) { return height(t); }, true);
}

double PeriodicSurface::min_height() const {
  return sampled_extremum([this](double t) { return height(t); }, false);
}

void PeriodicSurface::validate() const {
  if (!(H > 0.0)) throw std::invalid_argument("surface: H must be positive");
  if (!(max_height() < H))
    throw std::invalid_argument("surface: max zeta must be strictly below H");
}

PeriodicSurface paper_surface(double H) {
  PeriodicSurface s;
  s.c0 = 1.5;
  s.sin_coeffs = {1.0 / 3.0};
  s.cos_coeffs = {0.0, -0.25};
  s.H = H;
  return s;
}

PeriodicSurface flat_surface(double height, double H) {
  PeriodicSurface s;
  s.c0 = height;
  s.H = H;
  return s;
}

double compute_underline_k(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("wavenumber must be positive");
  return std::abs(k - std::round(k));
}

std::vector<double> compute_exceptional_set(double k) {
  double ku = compute_underline_k(k);
  double two_k = 2.0 * k;
  bool half_integer = std::abs(two_k - std::round(two_k)) < 1e-12 * std::max(1.0, two_k);
  if (half_integer) return {-ku, 1.0 - ku};
  return {-ku, ku, 1.0 - ku};
}

WaveParameters make_wave_parameters(double k) {
  WaveParameters p;
  p.k = k;
  p.k_under = compute_underline_k(k);
  p.exceptional_set = compute_exceptional_set(k);
  return p;
}

IntervalSplit decompose_intervals(const WaveParameters& params) {
  double ku = params.k_under;
  IntervalSplit split;
  bool edge_case = params.exceptional_set.size() == 2;
  if (edge_case) {
    split.intervals = {{-ku, 0.5 - ku, SingularEnd::Left},
                       {0.5 - ku, 1.0 - ku, SingularEnd::Right}};
  } else {
    split.intervals = {{-ku, 0.0, SingularEnd::Left},
                       {0.0, ku, SingularEnd::Right},
                       {ku, 0.5, SingularEnd::Left},
                       {0.5, 1.0 - ku, SingularEnd::Right}};
  }
  return split;
}

}  // namespace blochscat
