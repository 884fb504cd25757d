#ifndef BLOCHSCAT_SPECFUN_HPP
#define BLOCHSCAT_SPECFUN_HPP

#include <complex>
#include <vector>

namespace blochscat {

using Complex = std::complex<double>;

// Square root with branch cut along the negative imaginary axis:
// z = r e^{i theta}, theta in (-pi/2, 3pi/2], sqrt(z) = sqrt(r) e^{i theta/2}.
// Differs from the principal branch on the second and third quadrants.
Complex branch_sqrt(Complex z);

// beta_j(alpha) = branch_sqrt(k^2 - (alpha + j)^2). For real alpha this is
// positive real for propagating modes and positive imaginary for evanescent
// ones; exact Wood anomalies (|alpha + j| = k) give exactly zero.
Complex mode_root(double k, Complex alpha, int j);

// Hankel function of the first kind of order zero, H0^(1)(x) = J0(x) + i Y0(x).
// Relative accuracy better than 1e-10 on [1e-6, 1e3].
Complex hankel_h0_1(double x);

struct GaussRule {
  int order = 0;
  std::vector<double> nodes;    // in (-1, 1), ascending
  std::vector<double> weights;  // positive, sum to 2
};

// Gauss-Legendre rule on [-1,1]; nodes by Newton iteration on P_M.
GaussRule gauss_legendre_rule(int M);

}  // namespace blochscat

#endif  // BLOCHSCAT_SPECFUN_HPP
