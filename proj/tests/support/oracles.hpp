#pragma once

// Reference computations for the tests. Each one takes a different route from
// the library code it checks (enumeration, series, quadrature, direct complex
// arithmetic) so that agreement is evidence rather than repetition.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline double log2_objective(const Vec& c, const Vec& p) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += std::log2(1.0 + p(i) / c(i));
  return s;
}

/// Best objective over the simplex grid {p : p_k = n_k * P / steps, sum n_k <= steps}.
/// Separable, so the exhaustive maximum is a max-plus convolution over users.
inline double grid_waterfill_best(const Vec& c, double budget, int steps) {
  const double h = budget / steps;
  std::vector<double> best(static_cast<std::size_t>(steps) + 1, 0.0);
  std::vector<double> next(best.size());
  std::vector<double> g(best.size());
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    for (int t = 0; t <= steps; ++t) g[static_cast<std::size_t>(t)] = std::log2(1.0 + t * h / c(k));
    for (int s = 0; s <= steps; ++s) {
      double m = -std::numeric_limits<double>::infinity();
      for (int t = 0; t <= s; ++t) {
        m = std::max(m, best[static_cast<std::size_t>(s - t)] + g[static_cast<std::size_t>(t)]);
      }
      next[static_cast<std::size_t>(s)] = m;
    }
    best.swap(next);
  }
  return *std::max_element(best.begin(), best.end());
}

/// Two-user grid argmax by enumeration.
inline Vec grid_waterfill_argmax2(const Vec& c, double budget, int steps) {
  Vec best(2);
  double best_obj = -1.0;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      Vec p(2);
      p << budget * i / steps, budget * j / steps;
      const double obj = log2_objective(c, p);
      if (obj > best_obj) {
        best_obj = obj;
        best = p;
      }
    }
  }
  return best;
}

/// Water level by bisection on sum max(0, w - c_k) = P.
inline Vec bisection_waterfill(const Vec& c, double budget) {
  double lo = c.minCoeff(), hi = c.maxCoeff() + budget;
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    double used = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i) used += std::max(0.0, mid - c(i));
    (used > budget ? hi : lo) = mid;
  }
  const double w = 0.5 * (lo + hi);
  Vec p(c.size());
  for (Eigen::Index i = 0; i < c.size(); ++i) p(i) = std::max(0.0, w - c(i));
  return p;
}

/// SINR from the complex channel and precoder, with no gain matrix in between.
inline Vec direct_sinr(const CMat& h, const CMat& w, const Vec& p, double sigma2) {
  const auto k = h.cols();
  Vec out(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    double signal = 0.0, interference = 0.0;
    for (Eigen::Index l = 0; l < k; ++l) {
      std::complex<double> a(0.0, 0.0);
      for (Eigen::Index n = 0; n < h.rows(); ++n) a += std::conj(h(n, i)) * w(n, l);
      const double g = std::norm(a);
      (l == i ? signal : interference) += p(l) * g;
    }
    out(i) = signal / (interference + sigma2);
  }
  return out;
}

inline Vec direct_rates(const CMat& h, const CMat& w, const Vec& p, double sigma2, double bw_mhz) {
  const Vec g = direct_sinr(h, w, p, sigma2);
  Vec r(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) r(i) = bw_mhz * std::log2(1.0 + g(i));
  return r;
}

/// Largest |S| with sum_{k in S} cost_k <= budget, by enumerating all subsets.
inline int max_affordable_subset(const Vec& cost, double budget) {
  const auto k = static_cast<int>(cost.size());
  int best = 0;
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    double used = 0.0;
    int size = 0;
    for (int i = 0; i < k; ++i) {
      if (mask & (1u << i)) {
        used += cost(i);
        ++size;
      }
    }
    if (used <= budget) best = std::max(best, size);
  }
  return best;
}

/// sum_{m=0..terms} A^m b.
inline Vec neumann(const Mat& a, const Vec& b, int terms) {
  Vec acc = b, term = b;
  for (int m = 1; m <= terms; ++m) {
    term = a * term;
    acc += term;
  }
  return acc;
}

/// J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt, composite Simpson.
inline double bessel_j(int n, double x, int intervals = 4000) {
  const double pi = 3.14159265358979323846;
  const double h = pi / intervals;
  double s = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double t = i * h;
    const double f = std::cos(n * t - x * std::sin(t));
    s += (i == 0 || i == intervals) ? f : (i % 2 ? 4.0 * f : 2.0 * f);
  }
  return s * h / 3.0 / pi;
}

inline CMat random_channel(int n, int k, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, 1.0);
  CMat h(n, k);
  for (int j = 0; j < k; ++j) {
    for (int i = 0; i < n; ++i) h(i, j) = {nd(gen), nd(gen)};
  }
  return h;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace oracle
