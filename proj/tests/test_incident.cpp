#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "blochscat/geometry.hpp"
#include "blochscat/incident.hpp"
#include "blochscat/quadrature.hpp"
#include "blochscat/specfun.hpp"
#include "doctest.h"

using namespace blochscat;

namespace {

// Direct truncated Bloch lattice sum: sum_j phi(x1 + 2 pi j, x2) e^{-i a (...)}.
Complex lattice_bloch(const SourceSpec& spec, double k, double alpha,
                      Eigen::Vector2d x, int J) {
  Complex acc{0.0, 0.0};
  for (int j = -J; j <= J; ++j) {
    double x1 = x.x() + 2.0 * M_PI * j;
    acc += incident_field(spec, k, {x1, x.y()}) *
           std::exp(Complex{0.0, -alpha * x1});
  }
  return acc;
}

}  // namespace

TEST_CASE("Herglotz density closed form") {
  CHECK(herglotz_density(0.45) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(herglotz_density(0.4) == 0.0);
  CHECK(herglotz_density(0.5) == 0.0);
  CHECK(herglotz_density(0.39) == 0.0);
  CHECK(herglotz_density(0.51) == 0.0);
  CHECK(herglotz_density(0.425) ==
        doctest::Approx(std::pow(0.75, 6)).epsilon(1e-14));
}

TEST_CASE("point-pair incident fields vanish on the mirror line x2 = 0") {
  for (const SourceSpec& spec :
       {SourceSpec::point_pair_below(), SourceSpec::point_pair_above()}) {
    for (double k : {std::sqrt(2.0), 10.0}) {
      for (double x1 : {-2.0, 0.0, 0.7, 3.0}) {
        Complex v = incident_field(spec, k, {x1, 0.0});
        Complex scale = incident_field(spec, k, {x1, 1.0});
        CHECK(std::abs(v) <= 1e-12 * std::max(1.0, std::abs(scale)));
      }
    }
  }
  CHECK_THROWS_AS(
      incident_field(SourceSpec::point_pair_below(), 1.0, {0.4, 0.2}),
      std::invalid_argument);
}

TEST_CASE("Bloch Dirichlet trace agrees with the direct lattice sum") {
  SourceSpec spec = SourceSpec::point_pair_below();
  for (double k : {std::sqrt(2.0), 10.0}) {
    for (double alpha : {0.07, 0.31, -0.2}) {
      for (Eigen::Vector2d x :
           {Eigen::Vector2d{0.3, 1.4}, Eigen::Vector2d{-2.1, 2.9}}) {
        Complex series = bloch_dirichlet_trace(spec, k, alpha, x);
        Complex direct = lattice_bloch(spec, k, alpha, x, 200);
        // The lattice oracle has a slow 1/sqrt(j) tail.
        CHECK(std::abs(series - direct) <= 1e-4);
      }
    }
  }
}

TEST_CASE("Bloch trace periodicity in alpha and x1") {
  SourceSpec spec = SourceSpec::point_pair_below();
  double k = std::sqrt(2.0);
  for (double alpha : {0.11, 0.42}) {
    for (Eigen::Vector2d x :
         {Eigen::Vector2d{0.5, 1.7}, Eigen::Vector2d{1.9, 2.5}}) {
      Complex w0 = bloch_dirichlet_trace(spec, k, alpha, x);
      Complex w1 = bloch_dirichlet_trace(spec, k, alpha + 1.0, x);
      Complex lhs = std::exp(Complex{0.0, alpha * x.x()}) * w0;
      Complex rhs = std::exp(Complex{0.0, (alpha + 1.0) * x.x()}) * w1;
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));

      Complex shifted =
          bloch_dirichlet_trace(spec, k, alpha, {x.x() + 2.0 * M_PI, x.y()});
      CHECK(std::abs(w0 - shifted) <= 1e-12 * std::abs(w0));
    }
  }
  CHECK_THROWS_AS(bloch_dirichlet_trace(spec, k, 0.1, {0.0, 0.25}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      bloch_dirichlet_trace(SourceSpec::herglotz(), k, 0.1, {0.0, 2.0}),
      std::invalid_argument);
}

TEST_CASE("inverse Bloch transform of the trace recovers the incident field") {
  SourceSpec spec = SourceSpec::point_pair_below();
  double k = std::sqrt(2.0);
  QuadratureScheme scheme =
      build_quadrature(decompose_intervals(make_wave_parameters(k)), 0.5, 16, 10);
  for (Eigen::Vector2d x :
       {Eigen::Vector2d{0.7, 2.9}, Eigen::Vector2d{-1.3, 1.6}}) {
    Complex acc{0.0, 0.0};
    for (const QuadNode& node : scheme.nodes)
      acc += node.weight * std::exp(Complex{0.0, node.alpha * x.x()}) *
             bloch_dirichlet_trace(spec, k, node.alpha, x);
    Complex exact = incident_field(spec, k, x);
    CHECK(std::abs(acc - exact) <= 1e-6);
  }
}

TEST_CASE("Neumann data: point pair above becomes a phased point load") {
  SourceSpec spec = SourceSpec::point_pair_above();
  QpData d0 = bloch_neumann_data(spec, 10.0, 0.0);
  const PointLoad* pl = std::get_if<PointLoad>(&d0);
  REQUIRE(pl != nullptr);
  CHECK(pl->y1 == doctest::Approx(0.4));
  CHECK(std::abs(pl->amplitude - Complex{1.0, 0.0}) <= 1e-15);

  QpData d1 = bloch_neumann_data(spec, 10.0, 0.3);
  pl = std::get_if<PointLoad>(&d1);
  REQUIRE(pl != nullptr);
  CHECK(std::abs(pl->amplitude - std::exp(Complex{0.0, -0.3 * 0.4})) <= 1e-15);

  CHECK_THROWS_AS(bloch_neumann_data(SourceSpec::point_pair_below(), 10.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("Herglotz Bloch data selects exactly the supported modes") {
  QpData d = bloch_neumann_data(SourceSpec::herglotz(), 10.0, 0.07);
  const NeumannData* nd = std::get_if<NeumannData>(&d);
  REQUIRE(nd != nullptr);
  for (int m = -nd->J; m <= nd->J; ++m) {
    double xi = 0.07 + m;
    bool expect = std::abs(xi) < 10.0 &&
                  herglotz_density(std::asin(xi / 10.0)) > 0.0;
    CHECK((std::abs(nd->coeffs[m + nd->J]) > 0.0) == expect);
    if (expect) CHECK(m == 4);  // 10 sin(0.4) ~ 3.89, 10 sin(0.5) ~ 4.79
  }
}

TEST_CASE("Herglotz Bloch trace inverts back to the incident field") {
  // The lattice sum is useless here (a Herglotz wave only decays like
  // |x1|^{-1/2}), so check the closed-form transform through the inverse:
  // integrating w(alpha, x) e^{i alpha x1} over one period of alpha must
  // reproduce u^i on Gamma_H.
  SourceSpec spec = SourceSpec::herglotz();
  const double k = 10.0, H = 3.0;
  auto closed = [&](double alpha, double x1) {
    // Sum over modes of h(alpha+m) e^{i m x1 - i beta_m H}, h = g / beta.
    Complex acc{0.0, 0.0};
    for (int m = -12; m <= 12; ++m) {
      double xi = alpha + m;
      if (std::abs(xi) >= k) continue;
      double g = herglotz_density(std::asin(xi / k));
      if (g == 0.0) continue;
      double beta = std::sqrt(k * k - xi * xi);
      acc += g / beta * std::exp(Complex{0.0, m * x1 - beta * H});
    }
    return acc;
  };
  GaussRule rule = gauss_legendre_rule(12);
  const int panels = 50;
  for (double x1 : {0.0, 1.1, -2.4}) {
    Complex acc{0.0, 0.0};
    for (int p = 0; p < panels; ++p) {
      double a = double(p) / panels, half = 0.5 / panels;
      for (int q = 0; q < rule.order; ++q) {
        double alpha = a + half * (1.0 + rule.nodes[q]);
        acc += half * rule.weights[q] * closed(alpha, x1) *
               std::exp(Complex{0.0, alpha * x1});
      }
    }
    Complex exact = incident_field(spec, k, {x1, H});
    CHECK(std::abs(acc - exact) <= 1e-8);
  }
}
