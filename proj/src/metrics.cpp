#include "beamalloc/metrics.hpp"

#include <cmath>
#include <limits>

#include "beamalloc/error.hpp"

namespace beamalloc {

Vector sinr(const Matrix& gains, const Vector& powers, double sigma2) {
  const auto k = gains.rows();
  if (gains.cols() != k || powers.size() != k) throw InvalidInput("sinr: shape mismatch");
  Vector out(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double interference = 0.0;
    for (Eigen::Index l = 0; l < k; ++l) {
      if (l != i) interference += powers(l) * gains(i, l);
    }
    out(i) = powers(i) * gains(i, i) / (interference + sigma2);
  }
  return out;
}

Vector rates(const Matrix& gains, const Vector& powers, double sigma2, double bandwidth_mhz) {
  return (bandwidth_mhz * sinr(gains, powers, sigma2).array().log1p() / std::log(2.0)).matrix();
}

std::vector<int> satisfied_set(const Vector& rates_mbps, const Vector& demands_mbps) {
  std::vector<int> q;
  for (Eigen::Index i = 0; i < rates_mbps.size(); ++i) {
    if (rates_mbps(i) >= demands_mbps(i) * (1.0 - kRateTol)) q.push_back(static_cast<int>(i));
  }
  return q;
}

double jain(const Vector& ratios) {
  if (ratios.size() == 0) throw UndefinedMetric("jain: empty input");
  if ((ratios.array() < 0.0).any()) throw InvalidInput("jain: ratios must be nonnegative");
  const double sq = ratios.squaredNorm();
  if (!(sq > 0.0)) throw UndefinedMetric("jain: all ratios are zero");
  const double s = ratios.sum();
  return s * s / (static_cast<double>(ratios.size()) * sq);
}

double lambda_objective(int n_satisfied, int n_users, double sum_rate, double sumopt_sum_rate) {
  if (!(sumopt_sum_rate > 0.0)) throw UndefinedMetric("lambda: SumOpt sum rate is zero");
  const double k = n_users;
  const double omega = k * sumopt_sum_rate / (k + sumopt_sum_rate);
  return omega * (n_satisfied / k + sum_rate / sumopt_sum_rate);
}

MetricsSummary aggregate(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw InvalidInput("aggregate: no trials");
  MetricsSummary s;
  s.n_trials = trials.size();
  double jain_sum = 0.0, lambda_sum = 0.0;
  std::size_t jain_n = 0, lambda_n = 0;
  for (const auto& t : trials) {
    if (t.n_satisfied < t.n_users) s.congestion_prob += 1.0;
    s.satisfaction_prob += static_cast<double>(t.n_satisfied) / t.n_users;
    s.mean_sum_rate += t.sum_rate;
    s.mean_sum_rate_satisfied += t.sum_rate_satisfied;
    s.mean_sum_rate_unsatisfied += t.sum_rate - t.sum_rate_satisfied;
    if (std::isfinite(t.jain)) {
      jain_sum += t.jain;
      ++jain_n;
    }
    if (std::isfinite(t.lambda_obj)) {
      lambda_sum += t.lambda_obj;
      ++lambda_n;
    }
  }
  const double n = static_cast<double>(trials.size());
  s.congestion_prob /= n;
  s.satisfaction_prob /= n;
  s.mean_sum_rate /= n;
  s.mean_sum_rate_satisfied /= n;
  s.mean_sum_rate_unsatisfied /= n;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  s.jain_index = jain_n ? jain_sum / static_cast<double>(jain_n) : nan;
  s.lambda_obj = lambda_n ? lambda_sum / static_cast<double>(lambda_n) : nan;
  s.rows.assign(trials.begin(), trials.end());
  return s;
}

}  // namespace beamalloc
