#pragma once

// Central finite differences of the batch loss, one parameter at a time.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "beamalloc/surrogate.hpp"

namespace oracle {

struct GradCheck {
  double max_rel_err = 0.0;
  std::size_t n_checked = 0;
};

inline double grad_rel_err(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-7});
  return std::abs(analytic - numeric) / scale;
}

inline GradCheck check_gradient(const beamalloc::Mlp& net, const beamalloc::Matrix& x,
                                const beamalloc::Matrix& y, double eps = 1e-5) {
  beamalloc::MlpGradient g;
  beamalloc::mse_loss(net, x, y, &g);
  beamalloc::Mlp probe = net;
  GradCheck out;
  auto visit = [&](double& slot, double analytic) {
    const double keep = slot;
    slot = keep + eps;
    const double up = beamalloc::mse_loss(probe, x, y);
    slot = keep - eps;
    const double down = beamalloc::mse_loss(probe, x, y);
    slot = keep;
    out.max_rel_err = std::max(out.max_rel_err, grad_rel_err(analytic, (up - down) / (2 * eps)));
    ++out.n_checked;
  };
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto& layer = probe.layers[l];
    for (Eigen::Index i = 0; i < layer.w.size(); ++i) visit(layer.w.data()[i], g.dw[l].data()[i]);
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) visit(layer.b(i), g.db[l](i));
  }
  return out;
}

/// Random net and batch whose pre-activations stay clear of the rectifier kink.
struct GradCase {
  beamalloc::Mlp net;
  beamalloc::Matrix x, y;
};

inline GradCase random_grad_case(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> width(1, 6);
  std::uniform_int_distribution<int> depth(0, 2);
  std::vector<int> sizes{width(gen)};
  for (int d = depth(gen); d > 0; --d) sizes.push_back(width(gen) + 1);
  sizes.push_back(width(gen));
  GradCase c{beamalloc::Mlp::init(sizes, seed), {}, {}};
  std::normal_distribution<double> nd(0.0, 1.0);
  for (auto& layer : c.net.layers) {
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = 0.3 * nd(gen);
  }
  const int batch = 1 + static_cast<int>(seed % 5);
  c.x = beamalloc::Matrix::NullaryExpr(sizes.front(), batch, [&] { return nd(gen); });
  c.y = beamalloc::Matrix::NullaryExpr(sizes.back(), batch, [&] { return nd(gen); });
  return c;
}

}  // namespace oracle
