#include <doctest.h>

#include <cmath>
#include <random>

#include "beamalloc/error.hpp"
#include "beamalloc/feasibility.hpp"
#include "beamalloc/metrics.hpp"
#include "beamalloc/precoding.hpp"
#include "oracles.hpp"

using namespace beamalloc;

namespace {

constexpr double kB = 500.0;

Matrix random_gains(int k, double cross, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.5, 2.0), v(0.0, 1.0);
  Matrix g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) g(i, j) = i == j ? u(gen) : cross * v(gen);
  }
  return g;
}

}  // namespace

TEST_CASE("demand equal to the bandwidth needs unit SINR") {
  CHECK(sinr_target(kB, kB) == doctest::Approx(1.0).epsilon(1e-15));
  Matrix g = Matrix::Identity(1, 1) * 2.0;
  const DemandSystem ds = build_demand_system(g, Vector::Constant(1, kB), 1.0, kB);
  CHECK(ds.alpha(0) == doctest::Approx(1.0));
}

TEST_CASE("vanishing demand drives R and nu to zero") {
  Matrix g(2, 2);
  g << 1.0, 0.3, 0.2, 1.5;
  Vector xi(2);
  xi << 1e-9, 100.0;
  const DemandSystem ds = build_demand_system(g, xi, 1.0, kB);
  CHECK(ds.alpha(0) < 1e-11);
  CHECK(ds.r_diag(0) < 1e-11);
  CHECK(ds.nu(0) < 1e-11);
  CHECK(ds.rq().row(0).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("two-user system matches hand substitution") {
  Matrix g(2, 2);
  g << 2.0, 0.5, 0.25, 4.0;
  Vector xi(2);
  xi << 500.0, 1000.0;  // alpha = 1, 3
  const double s2 = 0.5;
  const DemandSystem ds = build_demand_system(g, xi, s2, kB);
  CHECK(ds.alpha(0) == doctest::Approx(1.0));
  CHECK(ds.alpha(1) == doctest::Approx(3.0));
  CHECK(ds.r_diag(0) == doctest::Approx(1.0 / (2.0 * 2.0)));
  CHECK(ds.r_diag(1) == doctest::Approx(3.0 / (4.0 * 4.0)));
  CHECK(ds.nu(0) == doctest::Approx(1.0 * s2 / (2.0 * 2.0)));
  CHECK(ds.nu(1) == doctest::Approx(3.0 * s2 / (4.0 * 4.0)));
  CHECK(ds.q(0, 1) == 0.5);
  CHECK(ds.q(1, 0) == 0.25);
}

TEST_CASE("invalid demand systems are rejected") {
  Matrix g = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(build_demand_system(g, Vector::Constant(2, 0.0), 1.0, kB), InvalidInput);
  g(1, 1) = 0.0;
  CHECK_THROWS_AS(build_demand_system(g, Vector::Constant(2, 10.0), 1.0, kB), DegenerateChannel);
}

TEST_CASE("diagonal system has closed-form radius and powers") {
  Matrix g = Matrix::Zero(3, 3);
  g.diagonal() << 1.0, 0.5, 3.0;
  Vector xi(3);
  xi << 300.0, 800.0, 1500.0;
  const double s2 = 0.7;
  const DemandSystem ds = build_demand_system(g, xi, s2, kB);
  const FeasibilityReport rep = check_feasible(ds, 1e6);
  double max_ratio = 0.0;
  for (int k = 0; k < 3; ++k) max_ratio = std::max(max_ratio, ds.alpha(k) / (ds.alpha(k) + 1.0));
  CHECK(rep.spectral_radius == doctest::Approx(max_ratio).epsilon(1e-10));
  REQUIRE(rep.min_powers);
  for (int k = 0; k < 3; ++k) {
    CHECK((*rep.min_powers)(k) == doctest::Approx(ds.alpha(k) * s2 / g(k, k)).epsilon(1e-12));
  }
  CHECK(rep.feasible());
}

TEST_CASE("symmetric two-user system matches the analytic 2x2 solve") {
  const double d = 2.0, q = 0.3, s2 = 1.0;
  Matrix g(2, 2);
  g << d, q, q, d;
  const DemandSystem ds = build_demand_system(g, Vector::Constant(2, 500.0), s2, kB);
  // alpha = 1: r = 1/(2d), nu = s2/(2d); (1 - r d) p - r q p = nu  =>  p = nu / (1 - r d - r q)
  const double r = 1.0 / (2.0 * d);
  const double expected = (s2 * r) / (1.0 - r * d - r * q);
  const FeasibilityReport rep = check_feasible(ds, 100.0);
  REQUIRE(rep.min_powers);
  CHECK((*rep.min_powers)(0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK((*rep.min_powers)(1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("radius at or above one is reported, not thrown") {
  Matrix g(2, 2);
  g << 1.0, 5.0, 5.0, 1.0;
  const DemandSystem ds = build_demand_system(g, Vector::Constant(2, 1500.0), 1.0, kB);
  FeasibilityReport rep;
  CHECK_NOTHROW(rep = check_feasible(ds, 1e9));
  CHECK(rep.spectral_radius >= 1.0);
  CHECK_FALSE(rep.radius_ok);
  CHECK_FALSE(rep.budget_ok);
  CHECK_FALSE(rep.min_powers.has_value());
}

TEST_CASE("budget verdict follows the total minimum power") {
  Matrix g = Matrix::Identity(2, 2);
  const DemandSystem ds = build_demand_system(g, Vector::Constant(2, 500.0), 1.0, kB);
  CHECK(check_feasible(ds, 2.0).budget_ok);
  CHECK_FALSE(check_feasible(ds, 1.999).budget_ok);
  CHECK(check_feasible(ds, 1.999).radius_ok);
}

TEST_CASE("random instances: exactness, Neumann series, lower bound, monotonicity") {
  std::mt19937_64 gen(21);
  std::uniform_int_distribution<int> kd(1, 7);
  std::uniform_real_distribution<double> xid(20.0, 900.0), cross(0.0, 0.3);
  int feasible = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int k = kd(gen);
    const Matrix g = random_gains(k, cross(gen), gen);
    Vector xi(k);
    for (int i = 0; i < k; ++i) xi(i) = xid(gen);
    const double s2 = 0.2;
    const DemandSystem ds = build_demand_system(g, xi, s2, kB);
    const FeasibilityReport rep = check_feasible(ds, 1e12);
    if (!rep.radius_ok) continue;
    ++feasible;
    const Vector& p = *rep.min_powers;
    const Vector r = rates(g, p, s2, kB);
    for (int i = 0; i < k; ++i) CHECK(oracle::rel_err(r(i), xi(i)) <= 1e-6);
    const Vector gam = sinr(g, p, s2);
    for (int i = 0; i < k; ++i) CHECK(oracle::rel_err(gam(i), ds.alpha(i)) <= 1e-8);
    if (rep.spectral_radius < 0.9) {
      const Vector series = oracle::neumann(ds.rq(), ds.nu, 200);
      CHECK((series - p).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, p.cwiseAbs().maxCoeff()));
    }
    CHECK(rep.lower_bound <= rep.total_min_power * (1.0 + 1e-12));

    Vector xi_up = xi;
    xi_up(trial % k) *= 1.1;
    const FeasibilityReport up = check_feasible(build_demand_system(g, xi_up, s2, kB), 1e12);
    if (up.radius_ok) CHECK(up.total_min_power >= rep.total_min_power * (1.0 - 1e-12));
    else CHECK(up.spectral_radius >= rep.spectral_radius);
  }
  CHECK(feasible > 200);
}

TEST_CASE("spectral radius of a known matrix") {
  Matrix m(2, 2);
  m << 0.0, 2.0, 0.5, 0.0;  // eigenvalues +-1
  CHECK(spectral_radius(m) == doctest::Approx(1.0).epsilon(1e-12));
}
