#ifndef BLOCHSCAT_QP_SOLVER_HPP
#define BLOCHSCAT_QP_SOLVER_HPP

#include <Eigen/Core>
#include <memory>
#include <variant>
#include <vector>

#include "blochscat/mesh.hpp"
#include "blochscat/sparse_lu.hpp"
#include "blochscat/specfun.hpp"

namespace blochscat {

// Right-hand-side data for one alpha-cell problem.
struct NeumannData {
  int J = 0;                // coefficients indexed j = -J..J
  Eigen::VectorXcd coeffs;  // Fourier coefficients of F(alpha, .) on Gamma_H
};
struct PointLoad {
  double y1 = 0.0;  // point functional on the top boundary
  Complex amplitude{0.0, 0.0};
};
struct DirichletLift {
  Eigen::VectorXcd boundary_values;  // per DirichletSurface slot
};
using QpData = std::variant<NeumannData, PointLoad, DirichletLift>;

// Assembly state shared between alpha-solves on one mesh: the stiffness,
// convection and mass blocks (one shared sparsity pattern), the Dirichlet
// coupling blocks, the trace Fourier matrix G, and the extended pattern with
// the dense DtN top-boundary block folded in. The full matrix for a given
// alpha is A(alpha) = S - 2i alpha C + (alpha^2 - k^2) Mass - 2pi G^H D G
// with D = diag(i beta_j).
class QpWorkspace {
 public:
  QpWorkspace(const StripMesh& mesh, double k, int J);

  const StripMesh& mesh() const { return *mesh_; }
  double k() const { return k_; }
  int J() const { return J_; }
  const Eigen::MatrixXcd& trace_matrix() const { return G_; }

  // Rebuild the volume values for this alpha (cheap, O(nnz)).
  void set_alpha(Complex alpha);
  Complex current_alpha() const { return alpha_; }

  // y = A(alpha) x at the current alpha, DtN applied in factored low-rank form.
  void matvec(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;

  // Full matrix at the current alpha with the DtN block folded in; the
  // returned reference stays valid until the next call.
  const SpMat& full_matrix();

  Eigen::VectorXcd build_rhs(const QpData& data) const;  // at current alpha
  NodalField make_field(Eigen::VectorXcd dofs, const QpData& data) const;

  // i beta_j(alpha), j = -J..J.
  Eigen::VectorXcd dtn_symbol() const;

  // Individual blocks applied to a vector (test support).
  Eigen::VectorXcd apply_stiffness(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply_convection(const Eigen::VectorXcd& x) const;
  Eigen::VectorXcd apply_mass(const Eigen::VectorXcd& x) const;

 private:
  const StripMesh* mesh_;
  double k_;
  int J_;
  Complex alpha_{0.0, 0.0};

  SpMat vol_;                               // combined values at current alpha
  std::vector<double> svals_, cvals_, mvals_;  // aligned with vol_ pattern
  Eigen::SparseMatrix<double, Eigen::ColMajor, long> sb_, cb_, mb_;  // lifting
  Eigen::MatrixXcd G_;  // (2J+1) x n1 trace Fourier map
  SpMat ext_;           // volume pattern plus dense top block
  std::vector<long> vol_slot_, dense_slot_;
};

// Spec-level single-alpha system.
struct QpSystem {
  std::shared_ptr<QpWorkspace> workspace;
  Complex alpha{0.0, 0.0};
  double k = 0.0;
  int J = 0;
  SpMat matrix;
  Eigen::VectorXcd rhs;
};

// Fourier coefficients of the top-boundary trace, j = -J..J; exact for the
// piecewise-linear trace on the uniform top grid.
Eigen::VectorXcd trace_fourier_coeffs(const StripMesh& mesh,
                                      const NodalField& field, int J);

// Coefficient-wise application of T^+_alpha: multiply by i beta_j.
Eigen::VectorXcd dtn_apply(double k, Complex alpha,
                           const Eigen::VectorXcd& coeffs);

QpSystem assemble_system(const StripMesh& mesh, double k, Complex alpha, int J);

// Direct factorization solve with residual check (<= 1e-10 relative).
NodalField solve_qp(const QpSystem& system, const QpData& data);

// Discrete norm of T^+_{alpha+i delta} - T^+_alpha in the weighted trace
// norms: sup_{|j| <= Jmax} |beta_j(alpha+i delta) - beta_j(alpha)| / sqrt(k^2+j^2).
double dtn_perturbation_norm(double k, double alpha, double delta, double a0,
                             double a1, int Jmax);

void dump_matrix(const SpMat& matrix, std::ostream& os);

// Default DtN truncation: ceil(k) + 16, capped at the trace Nyquist limit.
int default_dtn_order(double k, int n1);

// Reuses one factorization as a preconditioner for nearby alpha (restarted
// GMRES on the true matrix), refactoring adaptively when iteration counts
// make a fresh pivot cheaper. Every returned solution satisfies the same
// 1e-10 relative residual bound as a direct solve.
class QpSolveSession {
 public:
  struct Stats {
    long factorizations = 0;
    long solves = 0;
    long gmres_iterations = 0;
    double factor_seconds = 0.0;
    double solve_seconds = 0.0;
  };

  explicit QpSolveSession(QpWorkspace& ws, double tol = 1e-10);
  Eigen::VectorXcd solve(double alpha, const QpData& data);
  const Stats& stats() const { return stats_; }

 private:
  void refactor(double alpha);
  int gmres(const Eigen::VectorXcd& rhs, Eigen::VectorXcd& x) const;

  QpWorkspace& ws_;
  SparseLU lu_;
  double tol_;
  double pivot_alpha_ = 0.0;
  bool have_pivot_ = false;
  bool want_refactor_ = false;
  double factor_time_ = 0.0, iter_time_ = 0.0;
  Stats stats_;
};

}  // namespace blochscat

#endif  // BLOCHSCAT_QP_SOLVER_HPP
