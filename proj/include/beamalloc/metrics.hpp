#pragma once

#include <span>
#include <string>
#include <vector>

#include "beamalloc/types.hpp"

namespace beamalloc {

/// SINR of every user with full inter-user interference.
Vector sinr(const Matrix& gains, const Vector& powers, double sigma2);

/// R_k = B log2(1 + gamma_k) in Mbps.
Vector rates(const Matrix& gains, const Vector& powers, double sigma2, double bandwidth_mhz);

/// Relative tolerance on demand membership checks.
constexpr double kRateTol = 1e-6;

/// Users with R_k >= xi_k (1 - kRateTol), ascending.
std::vector<int> satisfied_set(const Vector& rates_mbps, const Vector& demands_mbps);

/// Jain's index (sum o)^2 / (K sum o^2). Throws UndefinedMetric if all o are 0.
double jain(const Vector& ratios);

/// Normalized objective Omega (|Q|/K + sum R / S) with Omega = K S / (K + S),
/// S = SumOpt sum rate on the same channel and precoder.
double lambda_objective(int n_satisfied, int n_users, double sum_rate, double sumopt_sum_rate);

/// One evaluated allocation.
struct TrialRecord {
  int n_users = 0;
  int n_satisfied = 0;
  double sum_rate = 0.0;
  double sum_rate_satisfied = 0.0;
  double jain = 0.0;        // NaN when undefined
  double lambda_obj = 0.0;  // NaN when undefined
};

struct MetricsSummary {
  std::size_t n_trials = 0;
  double congestion_prob = 0.0;
  double satisfaction_prob = 0.0;
  double mean_sum_rate = 0.0;
  double mean_sum_rate_satisfied = 0.0;
  double mean_sum_rate_unsatisfied = 0.0;
  double jain_index = 0.0;
  double lambda_obj = 0.0;
  std::vector<TrialRecord> rows;
};

/// Sample means over trials. NaN Jain/Lambda entries are left out of their
/// means. Throws InvalidInput on an empty set.
MetricsSummary aggregate(std::span<const TrialRecord> trials);

}  // namespace beamalloc
