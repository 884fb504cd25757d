#include "blochscat/sparse_lu.hpp"

#include <umfpack.h>

#include <stdexcept>
#include <string>

namespace blochscat {

static_assert(sizeof(SuiteSparse_long) == sizeof(long),
              "64-bit UMFPACK indices expected");

SparseLU::~SparseLU() { release(); }

SparseLU::SparseLU(SparseLU&& other) noexcept
    : numeric_(other.numeric_), n_(other.n_) {
  other.numeric_ = nullptr;
  other.n_ = 0;
}

SparseLU& SparseLU::operator=(SparseLU&& other) noexcept {
  if (this != &other) {
    release();
    numeric_ = other.numeric_;
    n_ = other.n_;
    other.numeric_ = nullptr;
    other.n_ = 0;
  }
  return *this;
}

void SparseLU::release() {
  if (numeric_) {
    umfpack_zl_free_numeric(&numeric_);
    numeric_ = nullptr;
  }
  n_ = 0;
}

void SparseLU::factorize(const SpMat& A) {
  if (A.rows() != A.cols())
    throw std::invalid_argument("SparseLU: matrix must be square");
  SpMat compressed;
  const SpMat* mat = &A;
  if (!A.isCompressed()) {
    compressed = A;
    compressed.makeCompressed();
    mat = &compressed;
  }
  release();
  n_ = mat->rows();

  const SuiteSparse_long* Ap = mat->outerIndexPtr();
  const SuiteSparse_long* Ai = mat->innerIndexPtr();
  const double* Ax = reinterpret_cast<const double*>(mat->valuePtr());

  double control[UMFPACK_CONTROL];
  umfpack_zl_defaults(control);

  void* symbolic = nullptr;
  SuiteSparse_long status = umfpack_zl_symbolic(n_, n_, Ap, Ai, Ax, nullptr,
                                                &symbolic, control, nullptr);
  if (status != UMFPACK_OK) {
    if (symbolic) umfpack_zl_free_symbolic(&symbolic);
    throw std::runtime_error("SparseLU: symbolic factorization failed, status " +
                             std::to_string(status));
  }
  status = umfpack_zl_numeric(Ap, Ai, Ax, nullptr, symbolic, &numeric_, control,
                              nullptr);
  umfpack_zl_free_symbolic(&symbolic);
  if (status != UMFPACK_OK) {
    release();
    throw std::runtime_error("SparseLU: numeric factorization failed, status " +
                             std::to_string(status));
  }
}

Eigen::VectorXcd SparseLU::solve(const Eigen::VectorXcd& b) const {
  if (!numeric_) throw std::runtime_error("SparseLU: not factorized");
  if (b.size() != n_) throw std::invalid_argument("SparseLU: size mismatch");
  Eigen::VectorXcd x(n_);
  double control[UMFPACK_CONTROL];
  umfpack_zl_defaults(control);
  control[UMFPACK_IRSTEP] = 0;  // no refinement; callers check residuals
  SuiteSparse_long status = umfpack_zl_solve(
      UMFPACK_A, nullptr, nullptr, nullptr, nullptr,
      reinterpret_cast<double*>(x.data()), nullptr,
      reinterpret_cast<const double*>(b.data()), nullptr, numeric_, control,
      nullptr);
  if (status != UMFPACK_OK)
    throw std::runtime_error("SparseLU: solve failed, status " +
                             std::to_string(status));
  return x;
}

}  // namespace blochscat
