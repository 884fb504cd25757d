#ifndef BLOCHSCAT_QUADRATURE_HPP
#define BLOCHSCAT_QUADRATURE_HPP

#include <Eigen/Core>
#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "blochscat/geometry.hpp"

namespace blochscat {

struct QuadNode {
  double alpha = 0.0;   // node in the Floquet interval
  double weight = 0.0;  // sigma_j > 0
  double t = 0.0;       // distance from the singular endpoint
  int interval_id = 0;
  bool is_trapezoid = false;
};

// Graded composite rule: per interval, t_n = p^{n-1} h, Gauss-Legendre with
// M points on each J_n = [t_{n+1}, t_n], trapezoid on J_0 = [0, p^N h].
// Right-singular intervals are mirrored so the singularity sits at t = 0.
struct QuadratureScheme {
  double p = 0.0;
  int N = 0, M = 0;
  IntervalSplit split;
  std::vector<QuadNode> nodes;  // grouped by interval, ascending alpha within

  std::span<const QuadNode> interval_nodes(int interval_id) const;
  int nodes_per_interval() const { return N * M + 2; }
};

QuadratureScheme build_quadrature(const IntervalSplit& split, double p, int N,
                                  int M);

// I_{N,M}(xi) = sum sigma_j xi_j over one interval's nodes (in scheme order).
std::complex<double> composite_integrate(
    const QuadratureScheme& scheme, int interval_id,
    std::span<const std::complex<double>> values);

// Algorithm step 3: u(x) = sum_j w(alpha_j, x) e^{i alpha_j x1} sigma_j,
// accumulated in ascending node order. fields[j] holds w(alpha_j, .) sampled
// at the target points.
Eigen::VectorXcd inverse_bloch(const QuadratureScheme& scheme,
                               const std::vector<Eigen::VectorXcd>& fields,
                               const std::vector<double>& x1_points);

// Ellipse with vertices (or foci) on the real axis and half-axis sum r.
struct EllipseSpec {
  double center = 0.0;
  double a = 0.0, b = 0.0;  // half axes, a >= b > 0 not required

  static EllipseSpec from_vertices(double v1, double v2, double r);
  static EllipseSpec from_foci(double c1, double c2, double r);
  bool contains(std::complex<double> z, double tol = 1e-12) const;
  std::complex<double> boundary_point(double theta) const;
};

// Checks E~^{lambda+mu}_{z-lambda, z+lambda} subset E~^{a+b}_{-a,a} by
// sampling >= 360 boundary points of the inner ellipse.
bool ellipse_containment_check(double lambda, double mu, double z, double a,
                               double b);

// Checks E~^{a + C sqrt(a/2)}_{-a,a} subset P = { x1 >= -a + x2^2/C^2 and
// x1 <= a - x2^2/C^2 } by boundary sampling.
bool ellipse_in_parabola_check(double a, double C_param);

// Theta of the exponential rate: min{ (1+sqrt p)/(1-sqrt p),
// sqrt((sqrt(2h)+C)/(sqrt(2h)-C)), sqrt 3 }.
double theta_estimate(double p, double h, double C_param);

// CSV dump: interval_id, alpha, sigma, is_trapezoid.
void dump_quadrature_csv(const QuadratureScheme& scheme, std::ostream& os);

}  // namespace blochscat

#endif  // BLOCHSCAT_QUADRATURE_HPP
