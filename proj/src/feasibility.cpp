#include "beamalloc/feasibility.hpp"

#include <cmath>
#include <string>

#include "beamalloc/error.hpp"

namespace beamalloc {

double sinr_target(double rate_mbps, double bandwidth_mhz) {
  return std::exp2(rate_mbps / bandwidth_mhz) - 1.0;
}

DemandSystem build_demand_system(const Matrix& gains, const Vector& demands_mbps,
                                 double sigma2, double bandwidth_mhz) {
  const auto k = gains.rows();
  if (gains.cols() != k || demands_mbps.size() != k) {
    throw InvalidInput("build_demand_system: shape mismatch");
  }
  DemandSystem ds;
  ds.q = gains;
  ds.alpha.resize(k);
  ds.r_diag.resize(k);
  ds.nu.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(demands_mbps(i) > 0.0)) {
      throw InvalidInput("build_demand_system: demand of user " + std::to_string(i) +
                         " must be positive");
    }
    const double g = gains(i, i);
    if (!(g > 0.0)) {
      throw DegenerateChannel("user " + std::to_string(i) + " has zero effective gain");
    }
    const double a = sinr_target(demands_mbps(i), bandwidth_mhz);
    ds.alpha(i) = a;
    ds.r_diag(i) = a / ((a + 1.0) * g);
    ds.nu(i) = a * sigma2 / ((a + 1.0) * g);
  }
  return ds;
}

double spectral_radius(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(m, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

FeasibilityReport check_feasible(const DemandSystem& ds, double p_max) {
  const auto k = ds.nu.size();
  const Matrix a = Matrix::Identity(k, k) - ds.rq();

  FeasibilityReport rep;
  rep.spectral_radius = spectral_radius(ds.rq());
  Eigen::JacobiSVD<Matrix> svd(a);
  rep.lower_bound = ds.nu.sum() / svd.singularValues()(0);

  rep.radius_ok = rep.spectral_radius < 1.0;
  if (rep.radius_ok) {
    Vector p = a.partialPivLu().solve(ds.nu);
    rep.total_min_power = p.sum();
    rep.min_powers = std::move(p);
    rep.budget_ok = rep.total_min_power <= p_max;
  }
  return rep;
}

}  // namespace beamalloc
