#ifndef BLOCHSCAT_VERIFY_HPP
#define BLOCHSCAT_VERIFY_HPP

#include <string>
#include <vector>

namespace blochscat {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Randomized property suites: branch-cut invariants of the square root, the
// DtN perturbation inequalities, ellipse containment, Gauss exactness, the
// DtN energy sign, and the flat-surface reflection order. Deterministic for
// a fixed seed; the full set runs in well under five minutes.
std::vector<CheckResult> run_property_suites(unsigned seed = 20240501);

// Observed L^2 / H^1-seminorm orders for a manufactured quasi-periodic
// solution on a flat strip under mesh refinement (expected 2 and 1).
struct ManufacturedOrders {
  double l2_order = 0.0;
  double h1_order = 0.0;
  std::vector<double> widths, l2_errors, h1_errors;
};
ManufacturedOrders manufactured_solution_orders();

// Observed order of the plane-wave reflection error on a flat surface
// (expected 2), plus the data behind the fit.
struct ReflectionOrder {
  double order = 0.0;
  std::vector<double> widths, errors;
};
ReflectionOrder flat_reflection_order();

}  // namespace blochscat

#endif  // BLOCHSCAT_VERIFY_HPP
