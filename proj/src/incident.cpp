#include "blochscat/incident.hpp"

#include <cmath>
#include <stdexcept>

namespace blochscat {

namespace {

Complex unit_phase(double arg) { return {std::cos(arg), std::sin(arg)}; }

// sin(beta c) / beta, stable as beta -> 0 (Wood anomalies).
Complex sinc_over(Complex beta, double c) {
  Complex bc = beta * c;
  if (std::abs(bc) < 0.05) {
    Complex b2 = bc * bc;
    return c * (1.0 - b2 / 6.0 + b2 * b2 / 120.0);
  }
  return std::sin(bc) / beta;
}

}  // namespace

SourceSpec SourceSpec::point_pair_below() { return SourceSpec{}; }

SourceSpec SourceSpec::point_pair_above() {
  SourceSpec s;
  s.kind = SourceKind::PointPairAbove;
  s.y_plus = {0.4, 3.0};
  s.y_minus = {0.4, -3.0};
  return s;
}

SourceSpec SourceSpec::herglotz() {
  SourceSpec s;
  s.kind = SourceKind::Herglotz;
  return s;
}

SourceSpec SourceSpec::example(int number) {
  switch (number) {
    case 1:
    case 2:
      return point_pair_below();
    case 3:
    case 4:
      return point_pair_above();
    case 5:
    case 6:
      return herglotz();
    default:
      throw std::invalid_argument("SourceSpec::example: number must be 1..6");
  }
}

double herglotz_density(double t, double a, double b) {
  if (t <= a || t >= b) return 0.0;
  double half = 0.5 * (b - a);
  double u = (t - a) * (t - b) / (half * half);
  double u3 = u * u * u;
  return u3 * u3;
}

Complex incident_field(const SourceSpec& spec, double k, Eigen::Vector2d x) {
  if (spec.kind == SourceKind::Herglotz) {
    // The density vanishes outside (a, b); integrate over the support.
    GaussRule rule = gauss_legendre_rule(64);
    double mid = 0.5 * (spec.a + spec.b), half = 0.5 * (spec.b - spec.a);
    Complex acc{0.0, 0.0};
    for (int j = 0; j < 64; ++j) {
      double t = mid + half * rule.nodes[j];
      acc += half * rule.weights[j] * herglotz_density(t, spec.a, spec.b) *
             unit_phase(k * (x.x() * std::sin(t) - x.y() * std::cos(t)));
    }
    return acc;
  }
  double r1 = (x - spec.y_plus).norm();
  double r2 = (x - spec.y_minus).norm();
  if (r1 < 1e-13 || r2 < 1e-13)
    throw std::invalid_argument("incident_field: evaluation at a source point");
  const Complex quarter_i{0.0, 0.25};
  return quarter_i * (hankel_h0_1(k * r1) - hankel_h0_1(k * r2));
}

Complex bloch_dirichlet_trace(const SourceSpec& spec, double k, double alpha,
                              Eigen::Vector2d x) {
  if (spec.kind != SourceKind::PointPairBelow)
    throw std::invalid_argument(
        "bloch_dirichlet_trace: below-surface point pair expected");
  if (spec.y_plus.x() != spec.y_minus.x() ||
      spec.y_plus.y() != -spec.y_minus.y())
    throw std::invalid_argument("bloch_dirichlet_trace: sources must mirror");
  const double y1 = spec.y_plus.x();
  const double c = spec.y_plus.y();          // half-separation of the pair
  const double d1 = x.y() - c;               // distance to the upper source
  if (d1 < 0.1)
    throw std::invalid_argument("bloch_dirichlet_trace: insufficient separation");

  // (J Phi(., y))(alpha, x) = (i / 4 pi) sum_n beta_n^{-1}
  //     e^{i n x1 - i (alpha + n) y1 + i beta_n (x2 - y2)};
  // the pair difference collapses to -2i e^{i beta x2} sin(beta c) / beta.
  Complex acc{0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    for (int step = 0;; ++step) {
      int n = side == 0 ? step : -1 - step;
      Complex beta = mode_root(k, Complex(alpha, 0.0), n);
      double decay = std::exp(-beta.imag() * d1);
      if (std::abs(alpha + n) > k && decay < 1e-14) break;
      Complex term = Complex(0.0, -2.0) * std::exp(Complex(0.0, 1.0) * beta * x.y()) *
                     sinc_over(beta, c) *
                     unit_phase(n * x.x() - (alpha + n) * y1);
      acc += term;
    }
  }
  return Complex(0.0, 0.25 / M_PI) * acc;
}

QpData bloch_neumann_data(const SourceSpec& spec, double k, double alpha,
                          double H) {
  if (spec.kind == SourceKind::PointPairBelow)
    throw std::invalid_argument(
        "bloch_neumann_data: the below-surface pair has vanishing datum; use "
        "the Dirichlet path");
  if (spec.kind == SourceKind::PointPairAbove) {
    // The source on the boundary yields f = delta(x1 - y1); its Bloch
    // transform is the periodic point functional with phase e^{-i alpha y1}.
    double y1 = spec.y_plus.x();
    return PointLoad{y1, unit_phase(-alpha * y1)};
  }
  // Herglotz: each propagating mode e^{i m x1 - i beta_m x2} with direction
  // inside the density support contributes (-2 i beta_m) e^{-i beta_m H} h,
  // h(xi) = g(arcsin(xi / k)) / sqrt(k^2 - xi^2).
  NeumannData nd;
  nd.J = int(std::ceil(k)) + 1;
  nd.coeffs = Eigen::VectorXcd::Zero(2 * nd.J + 1);
  for (int m = -nd.J; m <= nd.J; ++m) {
    double xi = alpha + m;
    if (std::abs(xi) >= k) continue;
    double t = std::asin(xi / k);
    double g = herglotz_density(t, spec.a, spec.b);
    if (g == 0.0) continue;
    double beta = std::sqrt(k * k - xi * xi);
    nd.coeffs[m + nd.J] =
        Complex(0.0, -2.0 * beta) * unit_phase(-beta * H) * (g / beta);
  }
  return nd;
}

}  // namespace blochscat
