#include "blochscat/specfun.hpp"

#include <cmath>
#include <stdexcept>

namespace blochscat {

Complex branch_sqrt(Complex z) {
  if (z == Complex(0.0, 0.0)) return {0.0, 0.0};
  double theta = std::atan2(z.imag(), z.real());  // (-pi, pi]
  if (theta <= -M_PI_2) theta += 2.0 * M_PI;      // remap to (-pi/2, 3pi/2]
  double r = std::sqrt(std::abs(z));
  return {r * std::cos(0.5 * theta), r * std::sin(0.5 * theta)};
}

Complex mode_root(double k, Complex alpha, int j) {
  if (!(k > 0.0)) throw std::invalid_argument("mode_root: k must be positive");
  Complex s = alpha + double(j);
  Complex z = k * k - s * s;
  // Snap exact Wood anomalies that only miss zero by rounding in alpha + j.
  double scale = std::max(k * k, std::norm(s));
  if (std::abs(z) <= 1e-13 * scale) return {0.0, 0.0};
  if (s.imag() == 0.0) {
    // Real quasimomentum: keep propagating modes exactly real and
    // evanescent modes exactly imaginary.
    double zr = z.real();
    return zr >= 0.0 ? Complex{std::sqrt(zr), 0.0}
                     : Complex{0.0, std::sqrt(-zr)};
  }
  return branch_sqrt(z);
}

namespace {

constexpr long double kEulerGamma = 0.57721566490153286060651209008240243L;

// Power series for J0 and Y0 (small and moderate arguments), evaluated in
// extended precision to absorb the alternating-series cancellation.
Complex hankel_series(double x) {
  long double q = (long double)(x)*x / 4.0L;  // (x/2)^2
  long double term = 1.0L;                    // q^m / (m!)^2
  long double j0 = 1.0L;
  long double ysum = 0.0L;  // sum (-1)^{m+1} H_m q^m / (m!)^2
  long double harmonic = 0.0L;
  long double sign = 1.0L;
  for (int m = 1; m <= 120; ++m) {
    term *= q / ((long double)m * m);
    harmonic += 1.0L / m;
    sign = -sign;
    j0 += sign * term;
    ysum -= sign * harmonic * term;
    if (term < 1e-22L * (1.0L + std::abs(j0))) break;
  }
  long double lg = std::log((long double)x / 2.0L) + kEulerGamma;
  long double y0 = (2.0L / M_PI) * (lg * j0 + ysum);
  return {(double)j0, (double)y0};
}

// Hankel asymptotic expansion for large arguments:
//   H0(x) ~ sqrt(2/(pi x)) e^{i(x - pi/4)} sum_m i^m a_m / x^m,
//   a_m = (-1)^m [1^2 3^2 ... (2m-1)^2] / (m! 8^m).
Complex hankel_asymptotic(double x) {
  Complex sum(1.0, 0.0);
  Complex term(1.0, 0.0);
  double prev = 1.0;
  for (int m = 1; m <= 40; ++m) {
    double f = (2.0 * m - 1.0);
    term *= Complex(0.0, -1.0) * (f * f) / (8.0 * m * x);
    double mag = std::abs(term);
    if (mag > prev) break;  // past the smallest term of the divergent series
    sum += term;
    prev = mag;
    if (mag < 1e-18) break;
  }
  double amp = std::sqrt(2.0 / (M_PI * x));
  double phase = x - M_PI_4;
  return amp * Complex(std::cos(phase), std::sin(phase)) * sum;
}

}  // namespace

Complex hankel_h0_1(double x) {
  if (!(x > 0.0))
    throw std::invalid_argument("hankel_h0_1: argument must be positive");
  return x <= 14.0 ? hankel_series(x) : hankel_asymptotic(x);
}

GaussRule gauss_legendre_rule(int M) {
  if (M < 1 || M > 64)
    throw std::invalid_argument("gauss_legendre_rule: order out of range");
  GaussRule rule;
  rule.order = M;
  rule.nodes.resize(M);
  rule.weights.resize(M);
  for (int i = 0; i < M; ++i) {
    // Tricomi-style initial guess for the i-th root of P_M, then Newton.
    double t = std::cos(M_PI * (i + 0.75) / (M + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int n = 2; n <= M; ++n) {
        double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
        p0 = p1;
        p1 = p2;
      }
      dp = M * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    rule.nodes[i] = t;
    rule.weights[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
  // Ascending nodes; the cos guess produces them descending.
  for (int i = 0; i < M / 2; ++i) {
    std::swap(rule.nodes[i], rule.nodes[M - 1 - i]);
    std::swap(rule.weights[i], rule.weights[M - 1 - i]);
  }
  // Symmetrize to kill the last rounding asymmetry.
  if (M % 2 == 1) rule.nodes[M / 2] = 0.0;
  for (int i = 0; i < M / 2; ++i) {
    double n = 0.5 * (rule.nodes[M - 1 - i] - rule.nodes[i]);
    rule.nodes[i] = -n;
    rule.nodes[M - 1 - i] = n;
    double w = 0.5 * (rule.weights[i] + rule.weights[M - 1 - i]);
    rule.weights[i] = rule.weights[M - 1 - i] = w;
  }
  return rule;
}

}  // namespace blochscat
