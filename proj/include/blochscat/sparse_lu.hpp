#ifndef BLOCHSCAT_SPARSE_LU_HPP
#define BLOCHSCAT_SPARSE_LU_HPP

#include <Eigen/Sparse>
#include <complex>

namespace blochscat {

// Column-major complex sparse matrix with 64-bit indices (the index width the
// factorization backend needs for memory estimates on large meshes).
using SpMat = Eigen::SparseMatrix<std::complex<double>, Eigen::ColMajor, long>;

// Complex sparse LU via UMFPACK (zl variant). The factorization does not
// retain the input matrix; callers verify residuals against their own copy.
class SparseLU {
 public:
  SparseLU() = default;
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;
  SparseLU(SparseLU&& other) noexcept;
  SparseLU& operator=(SparseLU&& other) noexcept;

  void factorize(const SpMat& A);  // throws std::runtime_error on failure
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
  bool valid() const { return numeric_ != nullptr; }
  long rows() const { return n_; }

 private:
  void release();
  void* numeric_ = nullptr;
  long n_ = 0;
};

}  // namespace blochscat

#endif  // BLOCHSCAT_SPARSE_LU_HPP
