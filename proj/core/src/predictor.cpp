#include "ddpred/predictor.hpp"

#include <stdexcept>

#include "ddpred/numerics.hpp"

namespace ddpred::predictor {

Vector min_norm_g(const Matrix& H1, const Vector& h) {
  if (H1.rows() != h.size()) {
    throw std::invalid_argument("window vector length must match H1 rows");
  }
  return numerics::lstsq_min_norm(H1, h);
}

namespace {

void check_online(const hankel::HankelConfig& cfg,
                  const hankel::OnlineWindow& online) {
  if (online.u_ini.size() != cfg.m * cfg.Tp ||
      online.u_pred.size() != cfg.m * cfg.Tf ||
      online.y_ini.size() != cfg.p * cfg.Tp) {
    throw std::invalid_argument("online window does not match the geometry");
  }
}

PredictionResult solve(const Matrix& H1, const Matrix& Yf, const Vector& h,
                       Method method, Index mT) {
  PredictionResult res;
  res.method = method;
  res.g_star = min_norm_g(H1, h);
  res.y_pred = Yf * res.g_star;
  res.excitation_warning = numerics::numerical_rank(H1) < mT;
  return res;
}

}  // namespace

PredictionResult predict_raw(const hankel::HankelBlocks& blocks,
                             const hankel::OnlineWindow& online) {
  check_online(blocks.config, online);
  return solve(blocks.h1(), blocks.Yf, online.stacked(), Method::raw,
               blocks.config.m * blocks.config.T);
}

Matrix TruncatedBlocks::h1() const {
  Matrix out(Up.rows() + Uf.rows() + Yp.rows(), Up.cols());
  out << Up, Uf, Yp;
  return out;
}

TruncatedBlocks truncate_blocks(const hankel::HankelBlocks& blocks, Index r) {
  const Matrix H = blocks.stacked();
  const Matrix Hhat = numerics::tsvd(H, r);  // validates r
  const auto& cfg = blocks.config;
  TruncatedBlocks out;
  Index row = 0;
  out.Up = Hhat.middleRows(row, cfg.m * cfg.Tp);
  row += cfg.m * cfg.Tp;
  out.Uf = Hhat.middleRows(row, cfg.m * cfg.Tf);
  row += cfg.m * cfg.Tf;
  out.Yp = Hhat.middleRows(row, cfg.p * cfg.Tp);
  row += cfg.p * cfg.Tp;
  out.Yf = Hhat.middleRows(row, cfg.p * cfg.Tf);
  return out;
}

PredictionResult predict_tsvd(const hankel::HankelBlocks& blocks, Index r,
                              const hankel::OnlineWindow& online) {
  check_online(blocks.config, online);
  const TruncatedBlocks t = truncate_blocks(blocks, r);
  return solve(t.h1(), t.Yf, online.stacked(), Method::tsvd,
               blocks.config.m * blocks.config.T);
}

}  // namespace ddpred::predictor
