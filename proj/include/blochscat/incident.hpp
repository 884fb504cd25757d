#ifndef BLOCHSCAT_INCIDENT_HPP
#define BLOCHSCAT_INCIDENT_HPP

#include <Eigen/Core>

#include "blochscat/qp_solver.hpp"
#include "blochscat/specfun.hpp"

namespace blochscat {

// The three incident fields driving the experiments: a mirrored point-source
// pair below the surface, a mirrored pair straddling the artificial boundary,
// and a Herglotz wave function with compactly supported density.
enum class SourceKind { PointPairBelow, PointPairAbove, Herglotz };

struct SourceSpec {
  SourceKind kind = SourceKind::PointPairBelow;
  Eigen::Vector2d y_plus{0.4, 0.2};    // source
  Eigen::Vector2d y_minus{0.4, -0.2};  // mirrored source (subtracted)
  double a = 0.4, b = 0.5;             // Herglotz density support

  static SourceSpec point_pair_below();
  static SourceSpec point_pair_above();
  static SourceSpec herglotz();
  // Examples 1-2: pair below; 3-4: pair above; 5-6: Herglotz.
  static SourceSpec example(int number);
};

// Density g(t) = (t-a)^6 (t-b)^6 / ((b-a)/2)^12 on (a,b), zero otherwise.
double herglotz_density(double t, double a = 0.4, double b = 0.5);

// u^i at a point: difference of fundamental solutions (point pairs) or the
// Herglotz superposition of downward plane waves.
Complex incident_field(const SourceSpec& spec, double k, Eigen::Vector2d x);

// (J u^i)(alpha, x) for the below-surface pair, via the spectral series of
// the Bloch-transformed fundamental solution (both sources share y1 and
// mirror in y2, which keeps the series stable through Wood anomalies).
Complex bloch_dirichlet_trace(const SourceSpec& spec, double k, double alpha,
                              Eigen::Vector2d x);

// Transformed boundary datum F(alpha, .) on the artificial boundary at
// height H: Fourier coefficients for the Herglotz field, a point functional
// for the pair source sitting on the boundary.
QpData bloch_neumann_data(const SourceSpec& spec, double k, double alpha,
                          double H = 3.0);

}  // namespace blochscat

#endif  // BLOCHSCAT_INCIDENT_HPP
