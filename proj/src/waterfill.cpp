#include "beamalloc/waterfill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "beamalloc/error.hpp"

namespace beamalloc {

WaterfillSolution waterfill(const WaterfillProblem& prob) {
  const Vector& c = prob.inverse_gains;
  const auto m = c.size();
  if (m == 0) throw InvalidInput("waterfill: empty problem");
  if (!(prob.budget >= 0.0) || !std::isfinite(prob.budget)) {
    throw InvalidInput("waterfill: budget must be finite and nonnegative");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(c(i) > 0.0)) throw InvalidInput("waterfill: inverse gains must be positive");
  }

  WaterfillSolution sol;
  sol.powers = Vector::Zero(m);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return c(a) < c(b); });

  const double cmin = c(order.front());
  if (!std::isfinite(cmin)) return sol;  // nobody can use power
  if (prob.budget == 0.0) {
    sol.level = cmin;
    return sol;
  }

  // Largest active count whose level stays above the last active c.
  double prefix = 0.0;
  double level = 0.0;
  std::size_t active = 0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const double cj = c(order[j]);
    if (!std::isfinite(cj)) break;
    const double candidate = (prob.budget + prefix + cj) / static_cast<double>(j + 1);
    if (j > 0 && candidate <= cj) break;
    prefix += cj;
    level = candidate;
    active = j + 1;
  }
  sol.level = level;
  for (std::size_t j = 0; j < active; ++j) {
    const auto i = order[j];
    sol.powers(i) = std::max(0.0, level - c(i));
  }
  return sol;
}

Vector waterfill(const Vector& inverse_gains, double budget) {
  return waterfill(WaterfillProblem{inverse_gains, budget}).powers;
}

double waterfill_objective(const Vector& inverse_gains, const Vector& powers) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < powers.size(); ++i) {
    if (std::isfinite(inverse_gains(i))) total += std::log2(1.0 + powers(i) / inverse_gains(i));
  }
  return total;
}

}  // namespace beamalloc
