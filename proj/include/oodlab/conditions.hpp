#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oodlab/risk.hpp"

namespace oodlab {

struct ConditionReport {
  std::string condition;
  bool holds = false;
  double max_deviation = 0.0;
  std::optional<double> violating_alpha;
  std::optional<TableHypothesis> witness;
  std::string note;
};

/// Descending epsilon grid standing in for "every eps > 0".
inline const std::vector<double>& default_eps_grid() {
  static const std::vector<double> grid{1.0, 0.1, 0.01, 0.001};
  return grid;
}

/// Alpha values strictly inside (0, 1) where the lower envelope of the
/// affine curves alpha -> R^alpha(h) changes hypothesis.
std::vector<double> envelope_kinks(const std::vector<RiskPair>& risks);

/// Linear condition on exactly the given alpha grid:
/// max |inf R^alpha - (1-alpha) inf R^in - alpha inf R^out| <= tol.
ConditionReport check_linear(const TableSpace& space, const Domain& domain,
                             const std::vector<double>& alpha_grid, double tol,
                             const Loss& loss);

/// Linear condition on the default 101-point grid plus every envelope kink.
ConditionReport check_linear(const TableSpace& space, const Domain& domain, double tol,
                             const Loss& loss);

/// Some h has R^in <= inf R^in + 2 eps and R^out <= inf R^out + 2 eps.
ConditionReport check_eps_intersection(const TableSpace& space, const Domain& domain, double eps,
                                       const Loss& loss);

/// check_eps_intersection over every eps of a descending grid; holds iff it
/// holds at the finest point.
ConditionReport check_eps_intersection_grid(const TableSpace& space, const Domain& domain,
                                            const std::vector<double>& eps_grid,
                                            const Loss& loss);

/// One h lies in every member's eps-optimal R^in and R^out level sets.
/// All domains must share an identical ID joint.
ConditionReport check_compatibility(const TableSpace& space, const std::vector<Domain>& domains,
                                    double eps, const Loss& loss);

/// l(y2, y1) <= l(k+1, y1) for all ID labels y1, y2.
bool check_condition3(const Loss& loss, int k);

struct RealizabilityResult {
  bool holds = false;
  std::optional<TableHypothesis> witness;
};

/// Some member has R_D = 0 at the domain's own pi_out.
RealizabilityResult check_realizability(const TableSpace& space, const Domain& domain,
                                        const Loss& loss);

/// argmin R_D == (intersection of argmin R_Qj) ∩ argmin R^in, as index sets.
bool check_argmin_decomposition(const TableSpace& space, const OodDecomposition& decomposition,
                                const Loss& loss);

/// c_alpha = min_{y1} ((1-alpha) min_{y2 in ID} l(y1, y2) + alpha l(y1, k+1)).
double overlap_constant(const Loss& loss, double alpha);

/// (c_alpha / m0) * |A_m0| with A_m = {x : f_I(x) >= 1/m, f_O(x) >= 1/m} and
/// m0 = ceil(1 / min shared density). Lower-bounds inf R^alpha over any space.
double overlap_lower_bound(const Domain& domain, double alpha, const Loss& loss);

}  // namespace oodlab
