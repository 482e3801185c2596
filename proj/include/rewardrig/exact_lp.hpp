#pragma once

#include <optional>
#include <vector>

#include "rewardrig/rational.hpp"

namespace rewardrig::lp {

using Matrix = std::vector<std::vector<Rational>>;

struct FeasibilityResult {
  bool feasible = false;
  /// x >= 0 with A x = b, when feasible.
  std::vector<Rational> solution;
  /// Farkas certificate when infeasible: y^T A <= 0 componentwise and
  /// y^T b > 0, so no x >= 0 can satisfy A x = b.
  std::vector<Rational> farkas;
};

/// Phase-one simplex over the rationals with Bland's rule. Exact; always
/// terminates. The returned certificate (either kind) is checked before
/// returning.
FeasibilityResult find_feasible_point(const Matrix& a, const std::vector<Rational>& b);

/// Some solution of A x = b (free variables set to zero), or nullopt.
std::optional<std::vector<Rational>> solve_linear_system(const Matrix& a, const std::vector<Rational>& b);

}  // namespace rewardrig::lp
