#pragma once

#include <string_view>

#include "beamalloc/channel.hpp"
#include "beamalloc/types.hpp"

namespace beamalloc {

enum class PrecoderKind { ZF, RZF };

std::string_view to_string(PrecoderKind kind);
PrecoderKind parse_precoder_kind(std::string_view name);

/// Column-normalized linear precoder.
struct Precoder {
  CMatrix w;            // N x K, unit-norm columns
  Vector raw_norms;     // ||w_bar_k|| before normalization
  PrecoderKind kind = PrecoderKind::ZF;
  double regularizer = 0.0;  // K sigma^2 / P_max for RZF, 0 for ZF
};

constexpr double kDefaultConditionCap = 1e8;

/// Condition number of H^H H (ratio of extreme eigenvalues).
double gram_condition(const CMatrix& h);

/// W = H (H^H H)^{-1}, normalized per column. Throws PrecoderSingular when the
/// Gram matrix condition number exceeds `condition_cap`.
Precoder make_zf(const CMatrix& h, double condition_cap = kDefaultConditionCap);

/// W = H (H^H H + rho I)^{-1} with rho = K sigma^2 / p_max, normalized per column.
Precoder make_rzf(const CMatrix& h, double sigma2, double p_max);

/// Matrix of |h_k^H w_l|^2 (rows: receiving user k, columns: precoder l).
Matrix link_gains(const CMatrix& h, const CMatrix& w);

}  // namespace beamalloc
