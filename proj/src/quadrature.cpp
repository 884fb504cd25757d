#include "blochscat/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "blochscat/specfun.hpp"

namespace blochscat {

std::span<const QuadNode> QuadratureScheme::interval_nodes(int interval_id) const {
  std::size_t per = std::size_t(nodes_per_interval());
  return {nodes.data() + per * interval_id, per};
}

QuadratureScheme build_quadrature(const IntervalSplit& split, double p, int N,
                                  int M) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("build_quadrature: need 0 < p < 1");
  if (N < 1 || M < 1)
    throw std::invalid_argument("build_quadrature: need N, M >= 1");

  GaussRule gauss = gauss_legendre_rule(M);
  QuadratureScheme scheme;
  scheme.p = p;
  scheme.N = N;
  scheme.M = M;
  scheme.split = split;

  for (std::size_t id = 0; id < split.intervals.size(); ++id) {
    const Interval& iv = split.intervals[id];
    double h = iv.length();
    std::vector<QuadNode> local;
    local.reserve(std::size_t(N) * M + 2);

    double tN1 = std::pow(p, N) * h;
    local.push_back({0.0, 0.5 * tN1, 0.0, int(id), true});
    local.push_back({0.0, 0.5 * tN1, tN1, int(id), true});
    for (int n = 1; n <= N; ++n) {
      double tn = std::pow(p, n - 1) * h;
      double tn1 = std::pow(p, n) * h;
      double half = 0.5 * (tn - tn1), mid = 0.5 * (tn + tn1);
      for (int j = 0; j < M; ++j)
        local.push_back({0.0, half * gauss.weights[j],
                         mid + half * gauss.nodes[j], int(id), false});
    }

    // Map t (distance from the singular endpoint) to alpha.
    for (QuadNode& node : local)
      node.alpha = iv.singular_end == SingularEnd::Left ? iv.a0 + node.t
                                                        : iv.a1 - node.t;
    std::sort(local.begin(), local.end(),
              [](const QuadNode& a, const QuadNode& b) { return a.alpha < b.alpha; });
    scheme.nodes.insert(scheme.nodes.end(), local.begin(), local.end());
  }
  return scheme;
}

std::complex<double> composite_integrate(
    const QuadratureScheme& scheme, int interval_id,
    std::span<const std::complex<double>> values) {
  auto nodes = scheme.interval_nodes(interval_id);
  if (values.size() != nodes.size())
    throw std::invalid_argument("composite_integrate: value count mismatch");
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t j = 0; j < nodes.size(); ++j)
    acc += nodes[j].weight * values[j];
  return acc;
}

Eigen::VectorXcd inverse_bloch(const QuadratureScheme& scheme,
                               const std::vector<Eigen::VectorXcd>& fields,
                               const std::vector<double>& x1_points) {
  if (fields.size() != scheme.nodes.size())
    throw std::invalid_argument("inverse_bloch: one field per node required");
  Eigen::Index n = Eigen::Index(x1_points.size());
  Eigen::VectorXcd u = Eigen::VectorXcd::Zero(n);
  for (std::size_t j = 0; j < scheme.nodes.size(); ++j) {
    if (fields[j].size() != n)
      throw std::invalid_argument("inverse_bloch: sample size mismatch");
    const double alpha = scheme.nodes[j].alpha, sigma = scheme.nodes[j].weight;
    for (Eigen::Index i = 0; i < n; ++i) {
      double phase = alpha * x1_points[i];
      u[i] += sigma * std::complex<double>(std::cos(phase), std::sin(phase)) *
              fields[j][i];
    }
  }
  return u;
}

EllipseSpec EllipseSpec::from_vertices(double v1, double v2, double r) {
  EllipseSpec e;
  e.center = 0.5 * (v1 + v2);
  e.a = 0.5 * std::abs(v2 - v1);
  e.b = r - e.a;
  return e;
}

EllipseSpec EllipseSpec::from_foci(double c1, double c2, double r) {
  // half-axes: a + b = r, a^2 - b^2 = c^2 -> a - b = c^2 / r.
  EllipseSpec e;
  e.center = 0.5 * (c1 + c2);
  double c = 0.5 * std::abs(c2 - c1);
  if (!(r > c)) throw std::invalid_argument("EllipseSpec: r must exceed c");
  e.a = 0.5 * (r + c * c / r);
  e.b = 0.5 * (r - c * c / r);
  return e;
}

bool EllipseSpec::contains(std::complex<double> z, double tol) const {
  double u = (z.real() - center) / a;
  double v = z.imag() / b;
  return u * u + v * v <= 1.0 + tol;
}

std::complex<double> EllipseSpec::boundary_point(double theta) const {
  return {center + a * std::cos(theta), b * std::sin(theta)};
}

bool ellipse_containment_check(double lambda, double mu, double z, double a,
                               double b) {
  if (!(a > 0.0 && b > 0.0 && lambda > 0.0))
    throw std::invalid_argument("ellipse_containment_check: bad arguments");
  EllipseSpec inner = EllipseSpec::from_vertices(z - lambda, z + lambda, lambda + mu);
  EllipseSpec outer = EllipseSpec::from_vertices(-a, a, a + b);
  for (int i = 0; i < 720; ++i) {
    if (!outer.contains(inner.boundary_point(i * M_PI / 360.0))) return false;
  }
  return true;
}

bool ellipse_in_parabola_check(double a, double C_param) {
  double r = a + C_param * std::sqrt(0.5 * a);
  EllipseSpec e = EllipseSpec::from_vertices(-a, a, r);
  for (int i = 0; i < 720; ++i) {
    std::complex<double> x = e.boundary_point(i * M_PI / 360.0);
    double bound = x.imag() * x.imag() / (C_param * C_param);
    if (x.real() < -a + bound - 1e-12 || x.real() > a - bound + 1e-12)
      return false;
  }
  return true;
}

double theta_estimate(double p, double h, double C_param) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("theta_estimate: bad p");
  if (!(h > 0.0)) throw std::invalid_argument("theta_estimate: bad h");
  double s2h = std::sqrt(2.0 * h);
  if (!(C_param > 0.0 && C_param < s2h))
    throw std::invalid_argument("theta_estimate: need 0 < C < sqrt(2h)");
  double sp = std::sqrt(p);
  double first = (1.0 + sp) / (1.0 - sp);
  double second = std::sqrt((s2h + C_param) / (s2h - C_param));
  return std::min({first, second, std::sqrt(3.0)});
}

void dump_quadrature_csv(const QuadratureScheme& scheme, std::ostream& os) {
  os << "interval_id,alpha,sigma,is_trapezoid\n";
  os.precision(17);
  for (const QuadNode& node : scheme.nodes)
    os << node.interval_id << "," << node.alpha << "," << node.weight << ","
       << (node.is_trapezoid ? 1 : 0) << "\n";
}

}  // namespace blochscat
