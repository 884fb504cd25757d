#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "blochscat/incident.hpp"
#include "blochscat/mesh.hpp"
#include "blochscat/qp_solver.hpp"
#include "blochscat/specfun.hpp"
#include "doctest.h"

using namespace blochscat;

namespace {

NodalField top_trace_field(const StripMesh& mesh,
                           const std::function<Complex(double)>& f) {
  NodalField field;
  field.mesh = &mesh;
  field.dofs = Eigen::VectorXcd::Zero(mesh.num_dofs);
  field.dirichlet = Eigen::VectorXcd::Zero(mesh.num_dirichlet);
  for (int v : mesh.top_nodes)
    field.dofs[mesh.dof_map[v]] = f(mesh.vertices[v].x());
  return field;
}

// Fourier coefficient of the piecewise-linear interpolant of f on the top
// grid, by per-element Gauss quadrature (dense independent oracle).
Complex interpolant_coeff_oracle(const StripMesh& mesh,
                                 const std::function<Complex(double)>& f,
                                 int j) {
  GaussRule rule = gauss_legendre_rule(16);
  const int n1 = mesh.n1;
  const double dx = 2.0 * M_PI / n1;
  Complex acc{0.0, 0.0};
  for (int e = 0; e < n1; ++e) {
    double xl = -M_PI + e * dx, xr = xl + dx;
    Complex fl = f(xl), fr = f(xr);
    for (int q = 0; q < 16; ++q) {
      double x = 0.5 * (xl + xr) + 0.5 * dx * rule.nodes[q];
      double s = (x - xl) / dx;
      Complex val = (1.0 - s) * fl + s * fr;
      acc += 0.5 * dx * rule.weights[q] * val *
             std::exp(Complex{0.0, -double(j) * x});
    }
  }
  return acc / (2.0 * M_PI);
}

}  // namespace

TEST_CASE("trace Fourier coefficients: constants, cosine, high mode") {
  StripMesh mesh = generate_strip_mesh(flat_surface(1.0, 3.0), 64, 8);

  NodalField ones = top_trace_field(mesh, [](double) { return Complex{1.0, 0.0}; });
  Eigen::VectorXcd c = trace_fourier_coeffs(mesh, ones, 4);
  CHECK(std::abs(c[4] - Complex{1.0, 0.0}) <= 1e-14);
  for (int j = -4; j <= 4; ++j)
    if (j != 0) CHECK(std::abs(c[j + 4]) <= 1e-14);

  auto cosf = [](double x) { return Complex{std::cos(x), 0.0}; };
  NodalField cosfield = top_trace_field(mesh, cosf);
  c = trace_fourier_coeffs(mesh, cosfield, 3);
  CHECK(std::abs(c[1 + 3] - 0.5) <= 1e-3);
  CHECK(std::abs(c[-1 + 3] - 0.5) <= 1e-3);
  for (int j = -3; j <= 3; ++j)
    CHECK(std::abs(c[j + 3] - interpolant_coeff_oracle(mesh, cosf, j)) <= 1e-12);

  auto e3 = [](double x) { return std::exp(Complex{0.0, 3.0 * x}); };
  NodalField e3field = top_trace_field(mesh, e3);
  c = trace_fourier_coeffs(mesh, e3field, 5);
  for (int j = -5; j <= 5; ++j) {
    CHECK(std::abs(c[j + 5] - interpolant_coeff_oracle(mesh, e3, j)) <= 1e-12);
    if (j != 3) CHECK(std::abs(c[j + 5]) < std::abs(c[3 + 5]));
  }
}

TEST_CASE("dtn_apply multiplies by i beta_j") {
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(1);
  phi[0] = 1.0;
  Eigen::VectorXcd out = dtn_apply(2.0, {0.0, 0.0}, phi);
  CHECK(std::abs(out[0] - Complex{0.0, 2.0}) <= 1e-14);

  phi = Eigen::VectorXcd::Zero(7);
  phi[3 + 3] = 1.0;
  out = dtn_apply(1.0, {0.0, 0.0}, phi);
  CHECK(std::abs(out[6] - Complex{-std::sqrt(8.0), 0.0}) <= 1e-13);

  double r2 = std::sqrt(2.0);
  phi = Eigen::VectorXcd::Zero(3);
  phi[1 + 1] = 1.0;
  out = dtn_apply(r2, {r2 - 1.0, 0.0}, phi);
  CHECK(out[2] == Complex{0.0, 0.0});
}

TEST_CASE("quadratic form on the constant field matches the closed form") {
  const double k = std::sqrt(2.0), H = 3.0;
  const int n1 = 32, n2 = 10;
  StripMesh mesh = generate_strip_mesh(flat_surface(1.0, H), n1, n2);
  QpWorkspace ws(mesh, k, default_dtn_order(k, n1));
  ws.set_alpha({0.0, 0.0});

  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(mesh.num_dofs);
  Eigen::VectorXcd g = Eigen::VectorXcd::Ones(mesh.num_dirichlet);
  Eigen::VectorXcd r(mesh.num_dofs);
  ws.matvec(x, r);
  r -= ws.build_rhs(DirichletLift{g});  // adds the A_{dof,dirichlet} block
  Complex q = r.sum();

  double dx = 2.0 * M_PI / n1, dz = (H - 1.0) / n2;
  double test_mass = 2.0 * M_PI * (H - 1.0) - n1 * dx * dz / 2.0;
  Complex exact = -k * k * test_mass - Complex{0.0, 2.0 * M_PI * k};
  CHECK(std::abs(q - exact) <= 1e-10 * std::abs(exact));
}

TEST_CASE("stiffness annihilates constants; convection is antisymmetric") {
  StripMesh mesh = generate_strip_mesh(paper_surface(), 24, 10);
  QpWorkspace ws1(mesh, 1.0, 8), ws2(mesh, std::sqrt(2.0), 8);
  ws1.set_alpha({0.0, 0.0});
  ws2.set_alpha({0.0, 0.0});
  Eigen::VectorXcd g = Eigen::VectorXcd::Ones(mesh.num_dirichlet);
  // b(k) = -S_db g + k^2 M_db g, so S_db g = b(sqrt 2) - 2 b(1).
  Eigen::VectorXcd b1 = ws1.build_rhs(DirichletLift{g});
  Eigen::VectorXcd b2 = ws2.build_rhs(DirichletLift{g});
  Eigen::VectorXcd s_full = ws1.apply_stiffness(
                                Eigen::VectorXcd::Ones(mesh.num_dofs)) +
                            (b2 - 2.0 * b1);
  CHECK(s_full.lpNorm<Eigen::Infinity>() <= 1e-12);

  std::mt19937 rng(5);
  std::normal_distribution<double> un(0.0, 1.0);
  Eigen::VectorXcd xr(mesh.num_dofs);
  for (long i = 0; i < mesh.num_dofs; ++i) xr[i] = un(rng);
  Complex form = xr.transpose() * ws1.apply_convection(xr);
  CHECK(std::abs(form) <= 1e-12 * double(mesh.num_dofs));
}

TEST_CASE("zero data yields the zero field") {
  StripMesh mesh = generate_strip_mesh(paper_surface(), 16, 8);
  QpSystem sys = assemble_system(mesh, std::sqrt(2.0), {0.3, 0.0}, 7);
  NeumannData nd;
  nd.J = 2;
  nd.coeffs = Eigen::VectorXcd::Zero(5);
  NodalField field = solve_qp(sys, nd);
  CHECK(field.dofs.norm() == 0.0);
}

TEST_CASE("Galerkin residual of a point-load solve is tiny") {
  StripMesh mesh = generate_strip_mesh(paper_surface(), 24, 10);
  double k = std::sqrt(2.0);
  QpSystem sys = assemble_system(mesh, k, {0.25, 0.0}, 10);
  QpData data = PointLoad{0.4, Complex{1.0, 0.0}};
  NodalField field = solve_qp(sys, data);
  QpWorkspace& ws = *sys.workspace;
  Eigen::VectorXcd b = ws.build_rhs(data);
  Eigen::VectorXcd r(mesh.num_dofs);
  ws.matvec(field.dofs, r);
  CHECK((b - r).norm() <= 1e-10 * b.norm());
}

TEST_CASE("Dirichlet lift reproduces the transformed incident field") {
  const double k = std::sqrt(2.0), alpha = 0.3;
  SourceSpec spec = SourceSpec::point_pair_below();
  auto run = [&](int n1, int n2) {
    StripMesh mesh = generate_strip_mesh(paper_surface(), n1, n2);
    QpSystem sys = assemble_system(mesh, k, {alpha, 0.0},
                                   default_dtn_order(k, n1));
    Eigen::VectorXcd g(mesh.num_dirichlet);
    for (int i = 0; i < n1; ++i) {
      int v = mesh.vertex_id(i, 0);
      g[mesh.dirichlet_index[v]] =
          -bloch_dirichlet_trace(spec, k, alpha, mesh.vertices[v]);
    }
    NodalField w = solve_qp(sys, DirichletLift{g});
    double num = 0.0, den = 0.0;
    for (int s = 0; s < 64; ++s) {
      double x1 = -M_PI + 2.0 * M_PI * s / 64.0;
      Complex have = interpolate(mesh, w, x1, 2.9);
      Complex want = -bloch_dirichlet_trace(spec, k, alpha, {x1, 2.9});
      num += std::norm(have - want);
      den += std::norm(want);
    }
    return std::sqrt(num / den);
  };
  double coarse = run(48, 16), fine = run(96, 32);
  CHECK(fine <= 5e-3);
  CHECK(coarse / fine >= 2.5);  // O(eps^2) halving
}

TEST_CASE("doubling the DtN order leaves the solution unchanged") {
  const double k = std::sqrt(2.0), alpha = 0.3;
  StripMesh mesh = generate_strip_mesh(paper_surface(), 64, 24);
  SourceSpec spec = SourceSpec::point_pair_below();
  Eigen::VectorXcd g(mesh.num_dirichlet);
  for (int i = 0; i < 64; ++i) {
    int v = mesh.vertex_id(i, 0);
    g[mesh.dirichlet_index[v]] =
        -bloch_dirichlet_trace(spec, k, alpha, mesh.vertices[v]);
  }
  int J = int(std::ceil(k)) + 10;
  NodalField w1 = solve_qp(assemble_system(mesh, k, {alpha, 0.0}, J),
                           DirichletLift{g});
  NodalField w2 = solve_qp(assemble_system(mesh, k, {alpha, 0.0}, 2 * J),
                           DirichletLift{g});
  CHECK((w1.dofs - w2.dofs).norm() <= 1e-8 * w1.dofs.norm());
}

TEST_CASE("DtN perturbation norm and the Theorem 4.4-style bound") {
  double r2 = std::sqrt(2.0);
  double a0 = 1.0 - r2, a1 = r2 - 1.0;  // the inner strip for k = sqrt(2)
  CHECK(dtn_perturbation_norm(r2, 0.2, 0.0, a0, a1, 100) == 0.0);
  double v = dtn_perturbation_norm(r2, 0.2, 1e-3, a0, a1, 100);
  double rho = 1e-3 / std::min(std::sqrt(0.2 - a0), std::sqrt(a1 - 0.2));
  CHECK(v > 0.0);
  CHECK(v <= rho + rho * rho * rho / (8.0 * r2));
  CHECK_THROWS_AS(dtn_perturbation_norm(r2, 0.9, 1e-3, a0, a1, 100),
                  std::invalid_argument);
}

TEST_CASE("session solves match direct solves across nearby alpha") {
  const double k = std::sqrt(2.0);
  StripMesh mesh = generate_strip_mesh(paper_surface(), 32, 12);
  QpWorkspace ws(mesh, k, default_dtn_order(k, 32));
  QpSolveSession session(ws);
  QpData data = PointLoad{0.4, Complex{1.0, 0.0}};
  for (double alpha : {0.05, 0.06, 0.08, 0.13, 0.21}) {
    Eigen::VectorXcd x = session.solve(alpha, data);
    QpSystem sys = assemble_system(mesh, k, {alpha, 0.0},
                                   default_dtn_order(k, 32));
    NodalField direct = solve_qp(sys, data);
    CHECK((x - direct.dofs).norm() <= 1e-8 * direct.dofs.norm());
  }
  CHECK(session.stats().solves == 5);
  CHECK(session.stats().factorizations >= 1);
}

TEST_CASE("matrix dump is coordinate text with one row per nonzero") {
  StripMesh mesh = generate_strip_mesh(flat_surface(1.0, 3.0), 8, 4);
  QpSystem sys = assemble_system(mesh, 1.0, {0.0, 0.0}, 3);
  std::ostringstream os;
  dump_matrix(sys.matrix, os);
  std::istringstream is(os.str());
  long rows = 0, r, c;
  double re, im;
  while (is >> r >> c >> re >> im) {
    ++rows;
    CHECK(r >= 0);
    CHECK(c >= 0);
    CHECK(r < mesh.num_dofs);
    CHECK(c < mesh.num_dofs);
  }
  CHECK(rows == sys.matrix.nonZeros());
}

TEST_CASE("default DtN order respects the Nyquist cap") {
  CHECK(default_dtn_order(std::sqrt(2.0), 128) == 18);
  CHECK(default_dtn_order(10.0, 128) == 26);
  CHECK(default_dtn_order(10.0, 32) == 15);
}
