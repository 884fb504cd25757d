#include "blochscat/qp_solver.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace blochscat {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

Complex unit_phase(double arg) { return {std::cos(arg), std::sin(arg)}; }

}  // namespace

QpWorkspace::QpWorkspace(const StripMesh& mesh, double k, int J)
    : mesh_(&mesh), k_(k), J_(J) {
  const int n1 = mesh.n1;
  if (J < 1 || J > n1 / 2 - 1)
    throw std::invalid_argument(
        "QpWorkspace: DtN order must satisfy 1 <= J <= n1/2 - 1");
  if (!(k > 0.0)) throw std::invalid_argument("QpWorkspace: k must be positive");

  const long ndof = mesh.num_dofs;
  const long ndir = mesh.num_dirichlet;
  using Triplet = Eigen::Triplet<double, long>;
  std::vector<Triplet> ts, tc, tm, tsb, tcb, tmb;
  ts.reserve(mesh.triangles.size() * 9);
  tc.reserve(mesh.triangles.size() * 9);
  tm.reserve(mesh.triangles.size() * 9);

  for (const auto& tri : mesh.triangles) {
    Eigen::Vector2d p[3] = {mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                            mesh.vertices[tri[2]]};
    double det = (p[1].x() - p[0].x()) * (p[2].y() - p[0].y()) -
                 (p[2].x() - p[0].x()) * (p[1].y() - p[0].y());
    double area = 0.5 * det;
    Eigen::Vector2d grad[3];
    for (int i = 0; i < 3; ++i) {
      const Eigen::Vector2d& q1 = p[(i + 1) % 3];
      const Eigen::Vector2d& q2 = p[(i + 2) % 3];
      grad[i] = Eigen::Vector2d(q1.y() - q2.y(), q2.x() - q1.x()) / det;
    }
    for (int i = 0; i < 3; ++i) {
      long r = mesh.dof_map[tri[i]];
      if (r < 0) continue;  // Dirichlet rows are eliminated
      for (int j = 0; j < 3; ++j) {
        double se = area * grad[i].dot(grad[j]);
        double ce = area / 3.0 * grad[j].x();
        double me = area / 12.0 * (i == j ? 2.0 : 1.0);
        long c = mesh.dof_map[tri[j]];
        if (c >= 0) {
          ts.emplace_back(r, c, se);
          tc.emplace_back(r, c, ce);
          tm.emplace_back(r, c, me);
        } else {
          long slot = mesh.dirichlet_index[tri[j]];
          tsb.emplace_back(r, slot, se);
          tcb.emplace_back(r, slot, ce);
          tmb.emplace_back(r, slot, me);
        }
      }
    }
  }

  Eigen::SparseMatrix<double, Eigen::ColMajor, long> S(ndof, ndof), C(ndof, ndof),
      M(ndof, ndof);
  S.setFromTriplets(ts.begin(), ts.end());
  C.setFromTriplets(tc.begin(), tc.end());
  M.setFromTriplets(tm.begin(), tm.end());
  sb_.resize(ndof, ndir);
  cb_.resize(ndof, ndir);
  mb_.resize(ndof, ndir);
  sb_.setFromTriplets(tsb.begin(), tsb.end());
  cb_.setFromTriplets(tcb.begin(), tcb.end());
  mb_.setFromTriplets(tmb.begin(), tmb.end());

  // The three volume blocks share one pattern by construction; keep the
  // pattern in vol_ and the values in aligned arrays.
  vol_ = S.cast<Complex>();
  const long nnz = vol_.nonZeros();
  svals_.assign(S.valuePtr(), S.valuePtr() + nnz);
  cvals_.assign(C.valuePtr(), C.valuePtr() + nnz);
  mvals_.assign(M.valuePtr(), M.valuePtr() + nnz);

  // Trace Fourier map on the uniform top grid.
  const double dx = 2.0 * M_PI / n1;
  G_.resize(2 * J + 1, n1);
  for (int jj = 0; jj <= 2 * J; ++jj) {
    int j = jj - J;
    double c = sinc(0.5 * j * dx);
    c = c * c / n1;
    for (int i = 0; i < n1; ++i)
      G_(jj, i) = c * unit_phase(-j * (-M_PI + i * dx));
  }

  // Extended pattern: volume plus the dense DtN block on the trailing
  // (top-boundary) dofs.
  const long base = ndof - n1;
  std::vector<Eigen::Triplet<Complex, long>> text;
  text.reserve(nnz + long(n1) * n1);
  for (long c = 0; c < ndof; ++c)
    for (SpMat::InnerIterator it(vol_, c); it; ++it)
      text.emplace_back(it.row(), c, Complex(0.0, 0.0));
  for (long c = 0; c < n1; ++c)
    for (long r = 0; r < n1; ++r)
      text.emplace_back(base + r, base + c, Complex(0.0, 0.0));
  ext_.resize(ndof, ndof);
  ext_.setFromTriplets(text.begin(), text.end());
  ext_.makeCompressed();

  vol_slot_.resize(nnz);
  long idx = 0;
  for (long c = 0; c < ndof; ++c) {
    SpMat::InnerIterator eit(ext_, c);
    for (SpMat::InnerIterator it(vol_, c); it; ++it, ++idx) {
      while (eit.row() != it.row()) ++eit;
      vol_slot_[idx] = &eit.value() - ext_.valuePtr();
    }
  }
  dense_slot_.resize(long(n1) * n1);
  for (long c = 0; c < n1; ++c) {
    SpMat::InnerIterator eit(ext_, base + c);
    for (long r = 0; r < n1; ++r) {
      while (eit.row() != base + r) ++eit;
      dense_slot_[c * n1 + r] = &eit.value() - ext_.valuePtr();
    }
  }

  set_alpha(Complex(0.0, 0.0));
}

void QpWorkspace::set_alpha(Complex alpha) {
  alpha_ = alpha;
  const Complex cc = Complex(0.0, -2.0) * alpha;
  const Complex cm = alpha * alpha - k_ * k_;
  Complex* v = vol_.valuePtr();
  const long nnz = vol_.nonZeros();
  for (long i = 0; i < nnz; ++i)
    v[i] = svals_[i] + cc * cvals_[i] + cm * mvals_[i];
}

Eigen::VectorXcd QpWorkspace::dtn_symbol() const {
  Eigen::VectorXcd d(2 * J_ + 1);
  for (int jj = 0; jj <= 2 * J_; ++jj)
    d[jj] = Complex(0.0, 1.0) * mode_root(k_, alpha_, jj - J_);
  return d;
}

void QpWorkspace::matvec(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  y.noalias() = vol_ * x;
  const long n1 = mesh_->n1;
  const long base = mesh_->num_dofs - n1;
  Eigen::VectorXcd f = G_ * x.segment(base, n1);
  f.array() *= dtn_symbol().array();
  y.segment(base, n1).noalias() -= 2.0 * M_PI * (G_.adjoint() * f);
}

const SpMat& QpWorkspace::full_matrix() {
  Complex* v = ext_.valuePtr();
  std::fill(v, v + ext_.nonZeros(), Complex(0.0, 0.0));
  const Complex* vv = vol_.valuePtr();
  for (long i = 0; i < vol_.nonZeros(); ++i) v[vol_slot_[i]] = vv[i];
  const long n1 = mesh_->n1;
  Eigen::MatrixXcd B =
      2.0 * M_PI * (G_.adjoint() * dtn_symbol().asDiagonal() * G_);
  for (long c = 0; c < n1; ++c)
    for (long r = 0; r < n1; ++r) v[dense_slot_[c * n1 + r]] -= B(r, c);
  return ext_;
}

Eigen::VectorXcd QpWorkspace::build_rhs(const QpData& data) const {
  const long ndof = mesh_->num_dofs;
  const long n1 = mesh_->n1;
  const long base = ndof - n1;
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(ndof);

  if (const auto* nd = std::get_if<NeumannData>(&data)) {
    if (nd->coeffs.size() != 2 * nd->J + 1)
      throw std::invalid_argument("NeumannData: coefficient count mismatch");
    int Jc = std::min(nd->J, J_);
    // <F, psi> = 2 pi sum_j F_j conj(psi_j) = 2 pi G^H F on the top dofs.
    Eigen::VectorXcd ft = Eigen::VectorXcd::Zero(2 * J_ + 1);
    for (int j = -Jc; j <= Jc; ++j) ft[j + J_] = nd->coeffs[j + nd->J];
    b.segment(base, n1) = 2.0 * M_PI * (G_.adjoint() * ft);
  } else if (const auto* pl = std::get_if<PointLoad>(&data)) {
    const double dx = 2.0 * M_PI / n1;
    double s = (pl->y1 + M_PI) / dx;
    s -= 2.0 * M_PI / dx * std::floor(s / (2.0 * M_PI / dx));
    long i0 = long(std::floor(s)) % n1;
    double frac = s - std::floor(s);
    b[base + i0] += pl->amplitude * (1.0 - frac);
    b[base + (i0 + 1) % n1] += pl->amplitude * frac;
  } else {
    const auto& g = std::get<DirichletLift>(data).boundary_values;
    if (g.size() != mesh_->num_dirichlet)
      throw std::invalid_argument("DirichletLift: boundary value count mismatch");
    const Complex cc = Complex(0.0, -2.0) * alpha_;
    const Complex cm = alpha_ * alpha_ - k_ * k_;
    auto accumulate = [&](const Eigen::SparseMatrix<double, Eigen::ColMajor, long>& blk,
                          Complex coef) {
      for (long c = 0; c < blk.outerSize(); ++c)
        for (Eigen::SparseMatrix<double, Eigen::ColMajor, long>::InnerIterator
                 it(blk, c);
             it; ++it)
          b[it.row()] -= coef * it.value() * g[c];
    };
    accumulate(sb_, Complex(1.0, 0.0));
    accumulate(cb_, cc);
    accumulate(mb_, cm);
  }
  return b;
}

NodalField QpWorkspace::make_field(Eigen::VectorXcd dofs,
                                   const QpData& data) const {
  NodalField field;
  field.mesh = mesh_;
  field.dofs = std::move(dofs);
  if (const auto* dl = std::get_if<DirichletLift>(&data))
    field.dirichlet = dl->boundary_values;
  else
    field.dirichlet = Eigen::VectorXcd::Zero(mesh_->num_dirichlet);
  return field;
}

Eigen::VectorXcd QpWorkspace::apply_stiffness(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  long idx = 0;
  for (long c = 0; c < vol_.outerSize(); ++c)
    for (SpMat::InnerIterator it(vol_, c); it; ++it, ++idx)
      y[it.row()] += svals_[idx] * x[c];
  return y;
}

Eigen::VectorXcd QpWorkspace::apply_convection(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  long idx = 0;
  for (long c = 0; c < vol_.outerSize(); ++c)
    for (SpMat::InnerIterator it(vol_, c); it; ++it, ++idx)
      y[it.row()] += cvals_[idx] * x[c];
  return y;
}

Eigen::VectorXcd QpWorkspace::apply_mass(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
  long idx = 0;
  for (long c = 0; c < vol_.outerSize(); ++c)
    for (SpMat::InnerIterator it(vol_, c); it; ++it, ++idx)
      y[it.row()] += mvals_[idx] * x[c];
  return y;
}

Eigen::VectorXcd trace_fourier_coeffs(const StripMesh& mesh,
                                      const NodalField& field, int J) {
  if (J < 1) throw std::invalid_argument("trace_fourier_coeffs: J >= 1 required");
  const int n1 = mesh.n1;
  const double dx = 2.0 * M_PI / n1;
  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(2 * J + 1);
  for (int i = 0; i < n1; ++i) {
    Complex v = field.vertex_value(mesh.top_nodes[i]);
    double x = -M_PI + i * dx;
    for (int j = -J; j <= J; ++j) {
      double c = sinc(0.5 * j * dx);
      coeffs[j + J] += v * (c * c / n1) * unit_phase(-j * x);
    }
  }
  return coeffs;
}

Eigen::VectorXcd dtn_apply(double k, Complex alpha,
                           const Eigen::VectorXcd& coeffs) {
  if (coeffs.size() % 2 == 0)
    throw std::invalid_argument("dtn_apply: expected coefficients j = -J..J");
  int J = int(coeffs.size() / 2);
  Eigen::VectorXcd out(coeffs.size());
  for (int j = -J; j <= J; ++j)
    out[j + J] = Complex(0.0, 1.0) * mode_root(k, alpha, j) * coeffs[j + J];
  return out;
}

QpSystem assemble_system(const StripMesh& mesh, double k, Complex alpha, int J) {
  QpSystem sys;
  sys.workspace = std::make_shared<QpWorkspace>(mesh, k, J);
  sys.alpha = alpha;
  sys.k = k;
  sys.J = J;
  sys.workspace->set_alpha(alpha);
  sys.matrix = sys.workspace->full_matrix();
  sys.rhs = Eigen::VectorXcd::Zero(mesh.num_dofs);
  return sys;
}

NodalField solve_qp(const QpSystem& system, const QpData& data) {
  QpWorkspace& ws = *system.workspace;
  ws.set_alpha(system.alpha);
  Eigen::VectorXcd b = ws.build_rhs(data);
  double bnorm = b.norm();
  if (bnorm == 0.0)
    return ws.make_field(Eigen::VectorXcd::Zero(ws.mesh().num_dofs), data);

  SparseLU lu;
  try {
    lu.factorize(system.matrix);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("solve_qp: factorization failed at alpha = " +
                             std::to_string(system.alpha.real()) + " (k = " +
                             std::to_string(system.k) + "): " + e.what());
  }
  Eigen::VectorXcd x = lu.solve(b);
  Eigen::VectorXcd r(b.size());
  for (int refine = 0; refine < 3; ++refine) {
    ws.matvec(x, r);
    r = b - r;
    if (r.norm() <= 1e-10 * bnorm) return ws.make_field(std::move(x), data);
    x += lu.solve(r);
  }
  ws.matvec(x, r);
  r = b - r;
  if (r.norm() > 1e-10 * bnorm)
    throw std::runtime_error("solve_qp: residual stagnated at alpha = " +
                             std::to_string(system.alpha.real()));
  return ws.make_field(std::move(x), data);
}

double dtn_perturbation_norm(double k, double alpha, double delta, double a0,
                             double a1, int Jmax) {
  if (!(alpha > a0 && alpha < a1))
    throw std::invalid_argument("dtn_perturbation_norm: alpha outside (a0, a1)");
  double sup = 0.0;
  for (int j = -Jmax; j <= Jmax; ++j) {
    double diff = std::abs(mode_root(k, Complex(alpha, delta), j) -
                           mode_root(k, Complex(alpha, 0.0), j));
    sup = std::max(sup, diff / std::sqrt(k * k + double(j) * j));
  }
  return sup;
}

void dump_matrix(const SpMat& matrix, std::ostream& os) {
  os.precision(17);
  for (long c = 0; c < matrix.outerSize(); ++c)
    for (SpMat::InnerIterator it(matrix, c); it; ++it)
      os << it.row() << " " << c << " " << it.value().real() << " "
         << it.value().imag() << "\n";
}

int default_dtn_order(double k, int n1) {
  int J = int(std::ceil(k)) + 16;
  return std::min(J, n1 / 2 - 1);
}

QpSolveSession::QpSolveSession(QpWorkspace& ws, double tol)
    : ws_(ws), tol_(tol) {}

void QpSolveSession::refactor(double alpha) {
  auto t0 = Clock::now();
  ws_.set_alpha(Complex(alpha, 0.0));
  lu_.factorize(ws_.full_matrix());
  factor_time_ = seconds_since(t0);
  stats_.factor_seconds += factor_time_;
  ++stats_.factorizations;
  pivot_alpha_ = alpha;
  have_pivot_ = true;
  want_refactor_ = false;
}

// Restarted GMRES, right-preconditioned by the pivot factorization; returns
// the iteration count, or -1 if the residual target was not reached.
int QpSolveSession::gmres(const Eigen::VectorXcd& rhs, Eigen::VectorXcd& x) const {
  const long n = rhs.size();
  const int m = 25, max_restarts = 4;
  const double target = tol_ * rhs.norm();

  Eigen::VectorXcd u = rhs;  // u-space iterate, x = M^{-1} u
  Eigen::VectorXcd au(n), r(n);
  int total_iters = 0;
  for (int restart = 0; restart < max_restarts; ++restart) {
    ws_.matvec(lu_.solve(u), au);
    r = rhs - au;
    double beta = r.norm();
    if (beta <= target) break;

    Eigen::MatrixXcd V(n, m + 1);
    Eigen::MatrixXcd Hm = Eigen::MatrixXcd::Zero(m + 1, m);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
    std::vector<Complex> cs(m), sn(m);
    V.col(0) = r / beta;
    g[0] = beta;
    int kdim = 0;
    for (int j = 0; j < m; ++j) {
      ws_.matvec(lu_.solve(V.col(j)), au);
      for (int i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        Hm(i, j) = V.col(i).dot(au);
        au -= Hm(i, j) * V.col(i);
      }
      Hm(j + 1, j) = au.norm();
      if (std::abs(Hm(j + 1, j)) > 0.0) V.col(j + 1) = au / Hm(j + 1, j);
      for (int i = 0; i < j; ++i) {  // apply stored Givens rotations
        Complex t = cs[i] * Hm(i, j) + sn[i] * Hm(i + 1, j);
        Hm(i + 1, j) = -std::conj(sn[i]) * Hm(i, j) + cs[i] * Hm(i + 1, j);
        Hm(i, j) = t;
      }
      {
        Complex a = Hm(j, j), b2 = Hm(j + 1, j);
        double na = std::abs(a), nb = std::abs(b2);
        double nrm = std::hypot(na, nb);
        if (nrm == 0.0) {
          kdim = j + 1;
          break;
        }
        if (na == 0.0) {
          cs[j] = 0.0;
          sn[j] = 1.0;
        } else {
          cs[j] = na / nrm;
          sn[j] = (a / na) * std::conj(b2) / nrm;
        }
        Hm(j, j) = cs[j] * a + sn[j] * b2;
        Hm(j + 1, j) = 0.0;
      }
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];
      kdim = j + 1;
      ++total_iters;
      if (std::abs(g[j + 1]) <= target) break;
    }
    // Solve the small triangular system and update u.
    Eigen::VectorXcd y(kdim);
    for (int i = kdim - 1; i >= 0; --i) {
      Complex s = g[i];
      for (int l = i + 1; l < kdim; ++l) s -= Hm(i, l) * y[l];
      y[i] = s / Hm(i, i);
    }
    u += V.leftCols(kdim) * y;
    ws_.matvec(lu_.solve(u), au);
    if ((rhs - au).norm() <= target) {
      x = lu_.solve(u);
      return total_iters;
    }
  }
  ws_.matvec(lu_.solve(u), au);
  if ((rhs - au).norm() <= target) {
    x = lu_.solve(u);
    return total_iters;
  }
  return -1;
}

Eigen::VectorXcd QpSolveSession::solve(double alpha, const QpData& data) {
  auto t0 = Clock::now();
  ws_.set_alpha(Complex(alpha, 0.0));
  Eigen::VectorXcd b = ws_.build_rhs(data);
  ++stats_.solves;
  if (b.norm() == 0.0) {
    stats_.solve_seconds += seconds_since(t0);
    return Eigen::VectorXcd::Zero(ws_.mesh().num_dofs);
  }

  if (!have_pivot_ || want_refactor_) {
    refactor(alpha);
    ws_.set_alpha(Complex(alpha, 0.0));
  }

  Eigen::VectorXcd x, r(b.size());
  if (alpha == pivot_alpha_) {
    x = lu_.solve(b);
    for (int refine = 0; refine < 3; ++refine) {
      ws_.matvec(x, r);
      r = b - r;
      if (r.norm() <= tol_ * b.norm()) break;
      x += lu_.solve(r);
    }
  } else {
    auto tg = Clock::now();
    int iters = gmres(b, x);
    double tgs = seconds_since(tg);
    if (iters > 0) {
      stats_.gmres_iterations += iters;
      double per_iter = tgs / iters;
      iter_time_ = iter_time_ == 0.0 ? per_iter : 0.7 * iter_time_ + 0.3 * per_iter;
      // Refactor when the marginal GMRES cost approaches a fresh pivot.
      if (factor_time_ > 0.0 && iter_time_ > 0.0 &&
          iters * iter_time_ > 0.6 * factor_time_)
        want_refactor_ = true;
    }
    if (iters < 0) {
      refactor(alpha);
      ws_.set_alpha(Complex(alpha, 0.0));
      x = lu_.solve(b);
      for (int refine = 0; refine < 3; ++refine) {
        ws_.matvec(x, r);
        r = b - r;
        if (r.norm() <= tol_ * b.norm()) break;
        x += lu_.solve(r);
      }
    }
  }
  ws_.matvec(x, r);
  r = b - r;
  if (r.norm() > tol_ * b.norm())
    throw std::runtime_error("QpSolveSession: residual target missed at alpha = " +
                             std::to_string(alpha));
  stats_.solve_seconds += seconds_since(t0);
  return x;
}

}  // namespace blochscat
