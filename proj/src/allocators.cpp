#include "beamalloc/allocators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "beamalloc/error.hpp"
#include "beamalloc/feasibility.hpp"
#include "beamalloc/metrics.hpp"
#include "beamalloc/waterfill.hpp"

namespace beamalloc {

namespace {

constexpr double kBudgetSlack = 1e-12;

bool within_budget(double total, double p_max) { return total <= p_max * (1.0 + kBudgetSlack); }

Vector spread(const Vector& inverse_gains, double budget, SurplusPolicy policy) {
  if (inverse_gains.size() == 0) return Vector{};
  budget = std::max(0.0, budget);
  if (policy == SurplusPolicy::WaterFill) return waterfill(inverse_gains, budget);
  return Vector::Constant(inverse_gains.size(), budget / static_cast<double>(inverse_gains.size()));
}

std::vector<int> complement_of(int n_users, const std::vector<int>& members) {
  std::vector<int> out;
  std::size_t j = 0;
  for (int k = 0; k < n_users; ++k) {
    if (j < members.size() && members[j] == k) {
      ++j;
    } else {
      out.push_back(k);
    }
  }
  return out;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(idx[i]);
  return out;
}

void scatter(Vector& dst, const std::vector<int>& idx, const Vector& src) {
  for (std::size_t i = 0; i < idx.size(); ++i) dst(idx[i]) = src(static_cast<Eigen::Index>(i));
}

AllocationResult finalize(const AllocationProblem& prob, const QoSProfile& qos, Vector powers,
                          Strategy strategy) {
  AllocationResult res;
  res.rates = prob.rates(powers);
  res.powers = std::move(powers);
  res.satisfied = satisfied_set(res.rates, qos.demands_mbps);
  res.congested = res.n_satisfied() < prob.n_users();
  res.strategy = strategy;
  return res;
}

IterationRecord record_of(const AllocationResult& r) { return {r.n_satisfied(), r.sum_rate()}; }

bool lexicographically_better(const AllocationResult& a, const AllocationResult& b) {
  if (a.n_satisfied() != b.n_satisfied()) return a.n_satisfied() > b.n_satisfied();
  return a.sum_rate() > b.sum_rate();
}

// Users in `members` held at their demand while everyone else transmits p_rest:
//   (I - R_S Q_SS) p_S = nu_S + R_S Q_{S,rest} p_rest.
class PinnedSubsystem {
 public:
  PinnedSubsystem(const AllocationProblem& prob, const Vector& demands,
                  std::vector<int> members)
      : members_(std::move(members)), rest_(complement_of(prob.n_users(), members_)) {
    const auto s = static_cast<Eigen::Index>(members_.size());
    const auto r = static_cast<Eigen::Index>(rest_.size());
    Matrix a = Matrix::Identity(s, s);
    nu_.resize(s);
    coupling_.resize(s, r);
    for (Eigen::Index i = 0; i < s; ++i) {
      const int k = members_[static_cast<std::size_t>(i)];
      const double g = prob.gains(k, k);
      if (!(g > 0.0)) throw DegenerateChannel("user " + std::to_string(k) + " has zero gain");
      const double alpha = sinr_target(demands(k), prob.bandwidth_mhz);
      const double rk = alpha / ((alpha + 1.0) * g);
      nu_(i) = rk * prob.sigma2;
      for (Eigen::Index j = 0; j < s; ++j) a(i, j) -= rk * prob.gains(k, members_[static_cast<std::size_t>(j)]);
      for (Eigen::Index j = 0; j < r; ++j) coupling_(i, j) = rk * prob.gains(k, rest_[static_cast<std::size_t>(j)]);
    }
    lu_.compute(a);
  }

  const std::vector<int>& members() const { return members_; }
  const std::vector<int>& rest() const { return rest_; }

  /// Pinned powers for the given transmit powers of the rest; nullopt if the
  /// solution is not strictly positive (demands not jointly reachable).
  std::optional<Vector> solve(const Vector& rest_powers) const {
    if (members_.empty()) return Vector{};
    Vector rhs = nu_;
    if (rest_powers.size() > 0) rhs += coupling_ * rest_powers;
    Vector p = lu_.solve(rhs);
    if (!p.allFinite() || (p.array() <= 0.0).any()) return std::nullopt;
    return p;
  }

 private:
  std::vector<int> members_;
  std::vector<int> rest_;
  Vector nu_;
  Matrix coupling_;
  Eigen::PartialPivLU<Matrix> lu_;
};

// Total power needed to pin `members` with everybody else silent.
std::optional<double> silent_pin_cost(const AllocationProblem& prob, const Vector& demands,
                                      const std::vector<int>& members) {
  PinnedSubsystem sys(prob, demands, members);
  auto p = sys.solve(Vector::Zero(static_cast<Eigen::Index>(sys.rest().size())));
  if (!p) return std::nullopt;
  return p->sum();
}

// Greedy admission: repeatedly add the outsider with the cheapest silent pin
// cost while it fits the budget. Ties go to the lowest index.
std::vector<int> admit(const AllocationProblem& prob, const Vector& demands,
                       std::vector<int> members) {
  const int k = prob.n_users();
  for (;;) {
    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int j : complement_of(k, members)) {
      std::vector<int> trial = members;
      trial.insert(std::upper_bound(trial.begin(), trial.end(), j), j);
      const auto cost = silent_pin_cost(prob, demands, trial);
      if (cost && *cost < best_cost) {
        best_cost = *cost;
        best = j;
      }
    }
    if (best < 0 || !within_budget(best_cost, prob.p_max)) return members;
    members.insert(std::upper_bound(members.begin(), members.end(), best), best);
  }
}

// Lifts a demand-meeting power vector with the surplus budget: the surplus is
// placed by `policy` on the interference-free rates, translated into rate
// increments, and the full system is re-pinned at demand + t * increment with
// the largest t in [0, 1] that fits the budget.
Vector repin_with_surplus(const AllocationProblem& prob, const Vector& demands,
                          const Vector& base_powers, SurplusPolicy policy) {
  const Vector c = prob.inverse_gains();
  const double surplus = prob.p_max - base_powers.sum();
  if (!(surplus > 0.0)) return base_powers;
  const Vector lifted = base_powers + spread(c, surplus, policy);
  Vector increment(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    increment(i) = prob.bandwidth_mhz *
                   (std::log2(1.0 + lifted(i) / c(i)) - std::log2(1.0 + base_powers(i) / c(i)));
  }
  auto attempt = [&](double t) -> std::optional<Vector> {
    auto p = detail::pin_all(prob, demands + t * increment);
    if (p && within_budget(p->sum(), prob.p_max)) return p;
    return std::nullopt;
  };
  if (auto full = attempt(1.0)) return *full;
  double lo = 0.0, hi = 1.0;
  Vector best = base_powers;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (auto p = attempt(mid)) {
      lo = mid;
      best = std::move(*p);
    } else {
      hi = mid;
    }
  }
  return best;
}

// Minimum powers plus the surplus placed by `policy`, as long as the added
// interference leaves every user at demand; otherwise the re-pinned lift.
Vector feasible_powers(const AllocationProblem& prob, const QoSProfile& qos,
                       const Vector& pin_demands, const Vector& min_powers,
                       SurplusPolicy policy) {
  Vector direct =
      min_powers + spread(prob.inverse_gains(), prob.p_max - min_powers.sum(), policy);
  if (static_cast<int>(satisfied_set(prob.rates(direct), qos.demands_mbps).size()) ==
      prob.n_users()) {
    return direct;
  }
  return repin_with_surplus(prob, pin_demands, min_powers, policy);
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Equal: return "equal";
    case Strategy::SumOpt: return "sumopt";
    case Strategy::SatisSet: return "satisset";
    case Strategy::Joint: return "joint";
    case Strategy::JointGeneric: return "joint_generic";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "equal") return Strategy::Equal;
  if (name == "sumopt") return Strategy::SumOpt;
  if (name == "satisset") return Strategy::SatisSet;
  if (name == "joint") return Strategy::Joint;
  if (name == "joint_generic") return Strategy::JointGeneric;
  throw InvalidConfig("unknown strategy '" + std::string(name) + "'");
}

QoSProfile QoSProfile::uniform(int n_users, double xi_mbps, double tolerance_fraction) {
  return from_demands(Vector::Constant(n_users, xi_mbps), tolerance_fraction);
}

QoSProfile QoSProfile::from_demands(Vector demands_mbps, double tolerance_fraction) {
  QoSProfile q;
  q.tolerances_mbps = tolerance_fraction * demands_mbps;
  q.demands_mbps = std::move(demands_mbps);
  return q;
}

void QoSProfile::validate(int n_users) const {
  if (demands_mbps.size() != n_users || tolerances_mbps.size() != n_users) {
    throw InvalidInput("QoS profile length does not match the number of users");
  }
  if ((demands_mbps.array() <= 0.0).any()) throw InvalidInput("demands must be positive");
  if ((tolerances_mbps.array() < 0.0).any()) throw InvalidInput("tolerances must be >= 0");
}

AllocationProblem AllocationProblem::from(const CMatrix& h, const Precoder& precoder,
                                          const SystemConfig& cfg) {
  AllocationProblem p;
  p.gains = link_gains(h, precoder.w);
  p.raw_norms = precoder.raw_norms;
  p.kind = precoder.kind;
  p.sigma2 = cfg.normalized_noise();
  p.bandwidth_mhz = cfg.bandwidth_mhz;
  p.p_max = cfg.p_max_w;
  return p;
}

Vector AllocationProblem::inverse_gains() const {
  if (kind == PrecoderKind::ZF) return (raw_norms.array().square() * sigma2).matrix();
  return (sigma2 / gains.diagonal().array()).matrix();
}

Vector AllocationProblem::rates(const Vector& powers) const {
  return beamalloc::rates(gains, powers, sigma2, bandwidth_mhz);
}

namespace detail {

std::optional<Vector> pin_all(const AllocationProblem& prob, const Vector& targets_mbps) {
  const DemandSystem ds =
      build_demand_system(prob.gains, targets_mbps, prob.sigma2, prob.bandwidth_mhz);
  const auto k = ds.nu.size();
  Vector p = (Matrix::Identity(k, k) - ds.rq()).partialPivLu().solve(ds.nu);
  // A Z-matrix with a positive solution to A p = nu > 0 has spectral radius
  // of RQ below one, so positivity doubles as the radius test.
  if (!p.allFinite() || (p.array() <= 0.0).any()) return std::nullopt;
  return p;
}

std::optional<Vector> solve_pinned(const AllocationProblem& prob, const Vector& demands_mbps,
                                   const std::vector<int>& members, SurplusPolicy policy,
                                   const AllocatorOptions& opts) {
  const int k = prob.n_users();
  const double budget = prob.p_max;
  if (members.empty()) return spread(prob.inverse_gains(), budget, policy);

  PinnedSubsystem sys(prob, demands_mbps, members);
  const auto& rest = sys.rest();
  const Vector c_rest = gather(prob.inverse_gains(), rest);
  const auto silent = sys.solve(Vector::Zero(c_rest.size()));
  if (!silent || !within_budget(silent->sum(), budget)) return std::nullopt;

  Vector out = Vector::Zero(k);
  if (rest.empty()) {
    scatter(out, members, *silent);
    return out;
  }

  // Budget S handed to the rest; pinned powers grow with S, so
  // S + sum(pinned(S)) - budget is increasing and has a single root.
  auto evaluate = [&](double s, Vector& pinned, Vector& rest_p) {
    rest_p = spread(c_rest, s, policy);
    auto p = sys.solve(rest_p);
    if (!p) return false;
    pinned = std::move(*p);
    return true;
  };
  double lo = 0.0;
  double hi = std::max(0.0, budget - silent->sum());
  Vector pinned = *silent, rest_p = Vector::Zero(c_rest.size());
  Vector trial_pinned, trial_rest;
  if (evaluate(hi, trial_pinned, trial_rest) &&
      within_budget(hi + trial_pinned.sum(), budget)) {
    pinned = trial_pinned;
    rest_p = trial_rest;
  } else {
    const double tol = 1e-4 * opts.inner_tol * std::max(1.0, budget);
    for (int it = 0; it < std::max(opts.inner_max_iters, 1) && hi - lo > tol; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (evaluate(mid, trial_pinned, trial_rest) &&
          within_budget(mid + trial_pinned.sum(), budget)) {
        lo = mid;
        pinned = trial_pinned;
        rest_p = trial_rest;
      } else {
        hi = mid;
      }
    }
  }
  scatter(out, members, pinned);
  scatter(out, rest, rest_p);
  return out;
}

}  // namespace detail

AllocationResult equal_power(const AllocationProblem& prob, const QoSProfile& qos) {
  const int k = prob.n_users();
  auto res = finalize(prob, qos, Vector::Constant(k, prob.p_max / k), Strategy::Equal);
  res.iterations = 1;
  res.trace.push_back(record_of(res));
  return res;
}

AllocationResult sum_opt(const AllocationProblem& prob, const QoSProfile& qos) {
  auto res = finalize(prob, qos, waterfill(prob.inverse_gains(), prob.p_max), Strategy::SumOpt);
  res.iterations = 1;
  res.trace.push_back(record_of(res));
  return res;
}

AllocationResult joint_opt_zf(const AllocationProblem& prob, const QoSProfile& qos,
                              SurplusPolicy policy) {
  if (prob.kind != PrecoderKind::ZF) throw InvalidInput("joint_opt_zf needs a ZF precoder");
  qos.validate(prob.n_users());
  const int k = prob.n_users();
  const Vector c = prob.inverse_gains();
  Vector p_min(k);
  for (int i = 0; i < k; ++i) p_min(i) = sinr_target(qos.demands_mbps(i), prob.bandwidth_mhz) * c(i);

  Vector powers = Vector::Zero(k);
  if (p_min.sum() <= prob.p_max) {
    powers = p_min + spread(c, prob.p_max - p_min.sum(), policy);
  } else {
    std::vector<int> order(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p_min(a) < p_min(b); });
    std::vector<int> members;
    double used = 0.0;
    for (int i : order) {
      if (used + p_min(i) > prob.p_max) break;
      used += p_min(i);
      members.push_back(i);
    }
    std::sort(members.begin(), members.end());
    for (int i : members) powers(i) = p_min(i);
    const auto rest = complement_of(k, members);
    scatter(powers, rest, spread(gather(c, rest), prob.p_max - used, policy));
  }
  auto res = finalize(prob, qos, std::move(powers), Strategy::Joint);
  res.iterations = 1;
  res.trace.push_back(record_of(res));
  return res;
}

AllocationResult joint_opt_rzf(const AllocationProblem& prob, const QoSProfile& qos,
                               const AllocatorOptions& opts, SurplusPolicy policy) {
  const int k = prob.n_users();
  qos.validate(k);
  const Vector relaxed = qos.relaxed();
  const DemandSystem ds = build_demand_system(prob.gains, relaxed, prob.sigma2, prob.bandwidth_mhz);
  const FeasibilityReport rep = check_feasible(ds, prob.p_max);

  if (rep.feasible()) {
    auto res = finalize(prob, qos, feasible_powers(prob, qos, relaxed, *rep.min_powers, policy),
                        Strategy::Joint);
    res.iterations = 1;
    res.trace.push_back(record_of(res));
    return res;
  }

  const Vector c = prob.inverse_gains();
  auto relaxed_hits = [&](const Vector& rates_now, const std::vector<int>& candidates) {
    std::vector<int> hits;
    for (int i : candidates) {
      if (rates_now(i) >= relaxed(i) * (1.0 - kRateTol)) hits.push_back(i);
    }
    return hits;
  };

  Vector powers = spread(c, prob.p_max, policy);
  std::vector<int> all(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) all[static_cast<std::size_t>(i)] = i;
  std::vector<int> relaxed_set = relaxed_hits(prob.rates(powers), all);
  std::vector<int> newly = relaxed_set;

  std::vector<IterationRecord> trace;
  AllocationResult best = finalize(prob, qos, powers, Strategy::Joint);
  trace.push_back({static_cast<int>(relaxed_set.size()), best.sum_rate()});

  int n = 0;
  bool converged = true;
  while (!newly.empty()) {
    if (n == opts.max_iters) {
      converged = false;
      break;
    }
    ++n;
    // Newly satisfied users drop to exactly their relaxed demand against the
    // interference of the current iterate.
    const Vector before = powers;
    for (int i : newly) {
      double interference = 0.0;
      for (int l = 0; l < k; ++l) {
        if (l != i) interference += before(l) * prob.gains(i, l);
      }
      powers(i) = ds.alpha(i) * (interference + prob.sigma2) / prob.gains(i, i);
    }
    double used = 0.0;
    for (int i : relaxed_set) used += powers(i);
    const auto rest = complement_of(k, relaxed_set);
    scatter(powers, rest, spread(gather(c, rest), prob.p_max - used, policy));

    newly = relaxed_hits(prob.rates(powers), rest);
    for (int i : newly) relaxed_set.insert(std::upper_bound(relaxed_set.begin(), relaxed_set.end(), i), i);

    auto candidate = finalize(prob, qos, powers, Strategy::Joint);
    trace.push_back({static_cast<int>(relaxed_set.size()), candidate.sum_rate()});
    if (lexicographically_better(candidate, best)) best = std::move(candidate);
  }
  best.iterations = n;
  best.trace = std::move(trace);
  best.converged = converged;
  return best;
}

AllocationResult joint_opt_generic(const AllocationProblem& prob, const QoSProfile& qos,
                                   const AllocatorOptions& opts, SurplusPolicy policy) {
  const int k = prob.n_users();
  qos.validate(k);
  const Vector& demands = qos.demands_mbps;
  const DemandSystem ds = build_demand_system(prob.gains, demands, prob.sigma2, prob.bandwidth_mhz);
  const FeasibilityReport rep = check_feasible(ds, prob.p_max);

  if (rep.feasible()) {
    auto res = finalize(prob, qos, feasible_powers(prob, qos, demands, *rep.min_powers, policy),
                        Strategy::JointGeneric);
    res.iterations = 1;
    res.trace.push_back(record_of(res));
    return res;
  }

  // Congested: start from the demand-free sum-rate point, then grow the
  // satisfied set until it stops growing.
  AllocationResult current = finalize(prob, qos, spread(prob.inverse_gains(), prob.p_max, policy),
                                      Strategy::JointGeneric);
  std::vector<IterationRecord> trace{record_of(current)};
  int n = 0;
  bool converged = true;
  for (;;) {
    if (n == opts.max_iters) {
      converged = false;
      break;
    }
    ++n;
    auto members = admit(prob, demands, current.satisfied);
    auto pinned = detail::solve_pinned(prob, demands, members, policy, opts);
    if (!pinned) pinned = detail::solve_pinned(prob, demands, current.satisfied, policy, opts);
    if (!pinned) break;
    auto next = finalize(prob, qos, std::move(*pinned), Strategy::JointGeneric);
    trace.push_back(record_of(next));
    const int delta = next.n_satisfied() - current.n_satisfied();
    current = std::move(next);
    if (delta <= 0) break;
  }
  current.iterations = n;
  current.trace = std::move(trace);
  current.converged = converged;
  return current;
}

AllocationResult satis_set_opt(const AllocationProblem& prob, const QoSProfile& qos,
                               const AllocatorOptions& opts) {
  AllocationResult res = prob.kind == PrecoderKind::ZF
                             ? joint_opt_zf(prob, qos, SurplusPolicy::Equal)
                             : joint_opt_rzf(prob, qos, opts, SurplusPolicy::Equal);
  res.strategy = Strategy::SatisSet;
  return res;
}

AllocationResult allocate(Strategy strategy, const AllocationProblem& prob,
                          const QoSProfile& qos, const AllocatorOptions& opts) {
  switch (strategy) {
    case Strategy::Equal: return equal_power(prob, qos);
    case Strategy::SumOpt: return sum_opt(prob, qos);
    case Strategy::SatisSet: return satis_set_opt(prob, qos, opts);
    case Strategy::Joint:
      return prob.kind == PrecoderKind::ZF ? joint_opt_zf(prob, qos)
                                           : joint_opt_rzf(prob, qos, opts);
    case Strategy::JointGeneric: return joint_opt_generic(prob, qos, opts);
  }
  throw InvalidInput("unknown strategy");
}

}  // namespace beamalloc
