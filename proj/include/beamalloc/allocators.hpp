#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "beamalloc/channel.hpp"
#include "beamalloc/precoding.hpp"
#include "beamalloc/types.hpp"

namespace beamalloc {

enum class Strategy { Equal, SumOpt, SatisSet, Joint, JointGeneric };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

/// Rate demands xi_k and the RZF relaxation tolerances omega_k, both in Mbps.
struct QoSProfile {
  Vector demands_mbps;
  Vector tolerances_mbps;

  static constexpr double kDefaultToleranceFraction = 0.02;

  static QoSProfile uniform(int n_users, double xi_mbps,
                            double tolerance_fraction = kDefaultToleranceFraction);
  static QoSProfile from_demands(Vector demands_mbps,
                                 double tolerance_fraction = kDefaultToleranceFraction);

  void validate(int n_users) const;
  Vector relaxed() const { return demands_mbps + tolerances_mbps; }
};

/// Everything an allocator sees: the link gain matrix |h_k^H w_l|^2 plus the
/// scalars of the power budget and rate formula.
struct AllocationProblem {
  Matrix gains;
  Vector raw_norms;
  PrecoderKind kind = PrecoderKind::ZF;
  double sigma2 = 1.0;
  double bandwidth_mhz = 500.0;
  double p_max = 1.0;

  static AllocationProblem from(const CMatrix& h, const Precoder& precoder,
                                const SystemConfig& cfg);

  int n_users() const { return static_cast<int>(gains.rows()); }

  /// c_k of the interference-free rate B log2(1 + p_k / c_k). For ZF this is
  /// ||w_bar_k||^2 sigma^2, otherwise sigma^2 / |h_k^H w_k|^2.
  Vector inverse_gains() const;

  Vector rates(const Vector& powers) const;
};

struct IterationRecord {
  int n_satisfied = 0;
  double sum_rate = 0.0;
};

struct AllocationResult {
  Vector powers;
  std::vector<int> satisfied;
  Vector rates;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  Strategy strategy = Strategy::Equal;
  bool congested = false;
  bool converged = true;

  double sum_rate() const { return rates.sum(); }
  int n_satisfied() const { return static_cast<int>(satisfied.size()); }
};

/// How power left after the demand phase is spread over the receiving users.
enum class SurplusPolicy { WaterFill, Equal };

struct AllocatorOptions {
  int max_iters = 50;
  int inner_max_iters = 100;
  double inner_tol = 1e-8;
};

AllocationResult equal_power(const AllocationProblem& prob, const QoSProfile& qos);

/// Water-filling on the interference-free rates; exact for ZF.
AllocationResult sum_opt(const AllocationProblem& prob, const QoSProfile& qos);

/// ZF closed form: minimum powers alpha_k ||w_bar_k||^2 sigma^2, ascending
/// admission when the budget is short, surplus on top.
AllocationResult joint_opt_zf(const AllocationProblem& prob, const QoSProfile& qos,
                              SurplusPolicy policy = SurplusPolicy::WaterFill);

/// RZF heuristic with relaxed demands xi + omega and power truncation of newly
/// satisfied users against the current interference.
AllocationResult joint_opt_rzf(const AllocationProblem& prob, const QoSProfile& qos,
                               const AllocatorOptions& opts = {},
                               SurplusPolicy policy = SurplusPolicy::WaterFill);

/// Precoder-agnostic satisfied-set growth with exact rate pinning.
AllocationResult joint_opt_generic(const AllocationProblem& prob, const QoSProfile& qos,
                                   const AllocatorOptions& opts = {},
                                   SurplusPolicy policy = SurplusPolicy::WaterFill);

/// The demand phase of the matching JointOpt algorithm, surplus split equally.
AllocationResult satis_set_opt(const AllocationProblem& prob, const QoSProfile& qos,
                               const AllocatorOptions& opts = {});

AllocationResult allocate(Strategy strategy, const AllocationProblem& prob,
                          const QoSProfile& qos, const AllocatorOptions& opts = {});

namespace detail {

/// Powers that meet every target rate with equality, or nullopt when no
/// nonnegative solution exists.
std::optional<Vector> pin_all(const AllocationProblem& prob, const Vector& targets_mbps);

/// Users in `members` (ascending) held at exactly their demand while the rest
/// share the remaining budget under `policy`. nullopt if the members cannot be
/// pinned within the budget even with the rest silent.
std::optional<Vector> solve_pinned(const AllocationProblem& prob, const Vector& demands_mbps,
                                   const std::vector<int>& members, SurplusPolicy policy,
                                   const AllocatorOptions& opts = {});

}  // namespace detail

}  // namespace beamalloc
