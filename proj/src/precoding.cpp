#include "beamalloc/precoding.hpp"

#include <limits>
#include <string>

#include "beamalloc/error.hpp"

namespace beamalloc {

namespace {

Precoder normalize(CMatrix w_bar, PrecoderKind kind, double regularizer) {
  Precoder out;
  out.kind = kind;
  out.regularizer = regularizer;
  out.raw_norms = w_bar.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < w_bar.cols(); ++k) {
    if (!(out.raw_norms(k) > 0.0) || !std::isfinite(out.raw_norms(k))) {
      throw DegenerateChannel("precoder column " + std::to_string(k) + " has zero norm");
    }
    w_bar.col(k) /= out.raw_norms(k);
  }
  out.w = std::move(w_bar);
  return out;
}

// Solves W_bar = H G^{-1} for Hermitian positive definite G via Cholesky.
CMatrix right_solve(const CMatrix& h, const CMatrix& gram) {
  Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw PrecoderSingular("Gram matrix is not positive definite");
  }
  // G^{-1} H^H = (H G^{-1})^H since G is Hermitian.
  return llt.solve(h.adjoint()).adjoint();
}

}  // namespace

std::string_view to_string(PrecoderKind kind) {
  return kind == PrecoderKind::ZF ? "zf" : "rzf";
}

PrecoderKind parse_precoder_kind(std::string_view name) {
  if (name == "zf") return PrecoderKind::ZF;
  if (name == "rzf") return PrecoderKind::RZF;
  throw InvalidConfig("unknown precoder '" + std::string(name) + "'");
}

double gram_condition(const CMatrix& h) {
  const CMatrix gram = h.adjoint() * h;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Precoder make_zf(const CMatrix& h, double condition_cap) {
  if (h.cols() == 0 || h.cols() > h.rows()) {
    throw InvalidInput("make_zf: need 1 <= K <= N");
  }
  const double cond = gram_condition(h);
  if (!(cond <= condition_cap)) {
    throw PrecoderSingular("make_zf: Gram condition number " + std::to_string(cond) +
                           " exceeds cap " + std::to_string(condition_cap));
  }
  return normalize(right_solve(h, h.adjoint() * h), PrecoderKind::ZF, 0.0);
}

Precoder make_rzf(const CMatrix& h, double sigma2, double p_max) {
  if (!(sigma2 > 0.0) || !(p_max > 0.0)) {
    throw InvalidInput("make_rzf: sigma2 and p_max must be positive");
  }
  if (h.cols() == 0) throw InvalidInput("make_rzf: empty channel");
  const auto k = h.cols();
  const double rho = static_cast<double>(k) * sigma2 / p_max;
  CMatrix gram = h.adjoint() * h;
  gram.diagonal().array() += rho;
  return normalize(right_solve(h, gram), PrecoderKind::RZF, rho);
}

Matrix link_gains(const CMatrix& h, const CMatrix& w) {
  return (h.adjoint() * w).cwiseAbs2();
}

}  // namespace beamalloc
