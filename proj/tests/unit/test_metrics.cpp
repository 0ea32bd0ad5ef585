#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "beamalloc/error.hpp"
#include "beamalloc/metrics.hpp"
#include "beamalloc/precoding.hpp"
#include "oracles.hpp"

using namespace beamalloc;

TEST_CASE("single user rate has no interference") {
  Matrix g = Matrix::Constant(1, 1, 3.0);
  const Vector p = Vector::Constant(1, 2.0);
  CHECK(sinr(g, p, 0.5)(0) == doctest::Approx(12.0));
  CHECK(rates(g, p, 0.5, 500.0)(0) == doctest::Approx(500.0 * std::log2(13.0)));
}

TEST_CASE("zero power gives zero rates") {
  Matrix g(2, 2);
  g << 1.0, 0.4, 0.1, 2.0;
  CHECK(rates(g, Vector::Zero(2), 1.0, 500.0).isZero(0.0));
}

TEST_CASE("two-user rates match hand substitution") {
  Matrix g(2, 2);
  g << 2.0, 0.5, 0.25, 4.0;
  Vector p(2);
  p << 1.0, 3.0;
  const Vector r = rates(g, p, 0.5, 100.0);
  CHECK(r(0) == doctest::Approx(100.0 * std::log2(1.0 + 2.0 / (1.5 + 0.5))));
  CHECK(r(1) == doctest::Approx(100.0 * std::log2(1.0 + 12.0 / (0.25 + 0.5))));
}

TEST_CASE("rates agree with direct complex evaluation and the ZF closed form") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> pd(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const CMatrix h = oracle::random_channel(7, 5, gen);
    if (gram_condition(h) > 1e5) continue;
    Vector p(5);
    for (int i = 0; i < 5; ++i) p(i) = pd(gen);
    const double s2 = 0.8;
    for (const Precoder& pre : {make_zf(h), make_rzf(h, s2, 10.0)}) {
      const Vector r = rates(link_gains(h, pre.w), p, s2, 500.0);
      const Vector ref = oracle::direct_rates(h, pre.w, p, s2, 500.0);
      for (int i = 0; i < 5; ++i) CHECK(oracle::rel_err(r(i), ref(i)) <= 1e-10);
      if (pre.kind == PrecoderKind::ZF) {
        for (int i = 0; i < 5; ++i) {
          const double closed = 500.0 * std::log2(1.0 + p(i) / (pre.raw_norms(i) * pre.raw_norms(i) * s2));
          CHECK(oracle::rel_err(r(i), closed) <= 1e-8);
        }
      }
    }
  }
}

TEST_CASE("satisfied set applies the relative tolerance") {
  Vector r(4), xi(4);
  r << 100.0, 99.99995, 99.0, 250.0;
  xi << 100.0, 100.0, 100.0, 200.0;
  CHECK(satisfied_set(r, xi) == std::vector<int>{0, 1, 3});
}

TEST_CASE("Jain index examples and bounds") {
  CHECK(jain(Vector::Constant(5, 0.7)) == doctest::Approx(1.0));
  Vector one = Vector::Zero(4);
  one(2) = 3.0;
  CHECK(jain(one) == doctest::Approx(0.25));
  Vector o(2);
  o << 1.0, 0.5;
  CHECK(jain(o) == doctest::Approx(0.9));
  CHECK_THROWS_AS(jain(Vector::Zero(3)), UndefinedMetric);
  CHECK_THROWS_AS(jain(Vector{}), UndefinedMetric);

  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  std::uniform_int_distribution<int> kd(1, 10);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = kd(gen);
    Vector v(k);
    for (int i = 0; i < k; ++i) v(i) = trial % 3 == 0 && i % 2 ? 0.0 : u(gen);
    if (v.sum() == 0.0) continue;
    const double j = jain(v);
    CHECK(j >= 1.0 / k - 1e-12);
    CHECK(j <= 1.0 + 1e-12);
  }
}

TEST_CASE("normalized objective") {
  const double s = 4000.0;
  const double omega = 7.0 * s / (7.0 + s);
  CHECK(lambda_objective(7, 7, s, s) == doctest::Approx(2.0 * omega));
  CHECK(lambda_objective(0, 7, 0.0, s) == 0.0);
  // Evaluated term by term: |Q|/K = 3/7, ratio = 2500/4000.
  CHECK(lambda_objective(3, 7, 2500.0, s) == doctest::Approx(omega * (3.0 / 7.0 + 0.625)));
  CHECK_THROWS_AS(lambda_objective(1, 7, 10.0, 0.0), UndefinedMetric);

  // Scaling the user rates and the SumOpt rates together keeps both ratio terms.
  const double a = lambda_objective(4, 7, 2000.0, s) / (7.0 * s / (7.0 + s));
  const double b = lambda_objective(4, 7, 2000.0 * 3.7, s * 3.7) / (7.0 * s * 3.7 / (7.0 + s * 3.7));
  CHECK(a == doctest::Approx(b).epsilon(1e-14));
}

TEST_CASE("aggregate") {
  TrialRecord t{7, 5, 3000.0, 2500.0, 0.8, 11.0};
  SUBCASE("single trial equals that trial") {
    const std::vector<TrialRecord> one{t};
    const MetricsSummary s = aggregate(one);
    CHECK(s.n_trials == 1);
    CHECK(s.congestion_prob == 1.0);
    CHECK(s.satisfaction_prob == doctest::Approx(5.0 / 7.0));
    CHECK(s.mean_sum_rate == 3000.0);
    CHECK(s.mean_sum_rate_satisfied == 2500.0);
    CHECK(s.mean_sum_rate_unsatisfied == 500.0);
    CHECK(s.jain_index == 0.8);
    CHECK(s.lambda_obj == 11.0);
  }
  SUBCASE("congested and uncongested trials") {
    TrialRecord full{7, 7, 4000.0, 4000.0, 1.0, 13.0};
    const std::vector<TrialRecord> two{t, full};
    const MetricsSummary s = aggregate(two);
    CHECK(s.congestion_prob == 0.5);
    CHECK(s.mean_sum_rate == 3500.0);
    CHECK(s.mean_sum_rate_satisfied + s.mean_sum_rate_unsatisfied == doctest::Approx(s.mean_sum_rate));
  }
  SUBCASE("undefined fairness entries are skipped") {
    TrialRecord none{7, 0, 0.0, 0.0, std::nan(""), std::nan("")};
    const std::vector<TrialRecord> two{t, none};
    const MetricsSummary s = aggregate(two);
    CHECK(s.jain_index == 0.8);
    CHECK(s.lambda_obj == 11.0);
    CHECK(s.mean_sum_rate == 1500.0);
  }
  CHECK_THROWS_AS(aggregate(std::vector<TrialRecord>{}), InvalidInput);
}
