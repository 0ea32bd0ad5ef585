#pragma once

#include <span>

#include "beamalloc/types.hpp"

namespace beamalloc {

/// max sum log2(1 + p_k / c_k)  s.t.  sum p_k <= budget, p >= 0.
///
/// `inverse_gains` holds c_k > 0; +inf marks a user that never receives power.
struct WaterfillProblem {
  Vector inverse_gains;
  double budget = 0.0;
};

struct WaterfillSolution {
  Vector powers;
  double level = 0.0;  // p_k = max(0, level - c_k)
};

/// Exact active-set water-filling: sorts c, finds the number of active users
/// in closed form. Throws InvalidInput on empty or invalid input.
WaterfillSolution waterfill(const WaterfillProblem& prob);

/// Convenience overload returning only the powers.
Vector waterfill(const Vector& inverse_gains, double budget);

/// Sum of log2(1 + p_k / c_k).
double waterfill_objective(const Vector& inverse_gains, const Vector& powers);

}  // namespace beamalloc
