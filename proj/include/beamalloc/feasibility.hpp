#pragma once

#include <limits>
#include <optional>

#include "beamalloc/types.hpp"

namespace beamalloc {

/// Linear system whose solution (I - R Q) p = nu meets every rate demand with
/// equality: R = diag(alpha_k / ((alpha_k + 1) g_kk)), Q_kl = g_kl,
/// nu_k = alpha_k sigma^2 / ((alpha_k + 1) g_kk), alpha_k = 2^{xi_k / B} - 1.
struct DemandSystem {
  Vector r_diag;
  Matrix q;
  Vector nu;
  Vector alpha;

  Matrix rq() const { return r_diag.asDiagonal() * q; }
};

/// Minimum SINR that delivers `rate_mbps` over `bandwidth_mhz`.
double sinr_target(double rate_mbps, double bandwidth_mhz);

/// `gains` is the K x K matrix of |h_k^H w_l|^2. Throws DegenerateChannel when
/// a diagonal gain is zero and InvalidInput when a demand is not positive.
DemandSystem build_demand_system(const Matrix& gains, const Vector& demands_mbps,
                                 double sigma2, double bandwidth_mhz);

struct FeasibilityReport {
  double spectral_radius = 0.0;
  std::optional<Vector> min_powers;  // set when radius_ok
  double total_min_power = std::numeric_limits<double>::infinity();
  bool radius_ok = false;
  bool budget_ok = false;
  double lower_bound = 0.0;  // 1^T nu / ||I - RQ||_2

  bool feasible() const { return radius_ok && budget_ok; }
};

/// Spectral radius of a square real matrix.
double spectral_radius(const Matrix& m);

/// Checks lambda(RQ) < 1 and 1^T (I - RQ)^{-1} nu <= p_max. Infeasibility is
/// reported, never thrown.
FeasibilityReport check_feasible(const DemandSystem& ds, double p_max);

}  // namespace beamalloc
