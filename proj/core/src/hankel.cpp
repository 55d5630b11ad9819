#include "ddpred/hankel.hpp"

#include <stdexcept>

#include "ddpred/numerics.hpp"
#include "ddpred/rng.hpp"

namespace ddpred::hankel {

HankelConfig make_hankel_config(Index Tp, Index Tf, Index L, Index m, Index p,
                                Index n) {
  if (Tp < 1) throw std::invalid_argument("past horizon must be at least 1");
  if (Tf < 1) throw std::invalid_argument("future horizon must be at least 1");
  if (m < 1 || p < 1) throw std::invalid_argument("m and p must be positive");
  if (n < 0) throw std::invalid_argument("model order must be nonnegative");
  const Index T = Tp + Tf;
  if (L < T) {
    throw std::invalid_argument(
        "trajectory length must be at least the window length");
  }
  HankelConfig cfg;
  cfg.T = T;
  cfg.Tp = Tp;
  cfg.Tf = Tf;
  cfg.L = L;
  cfg.M = L - T + 1;
  cfg.m = m;
  cfg.p = p;
  cfg.n = n;
  return cfg;
}

Matrix HankelBlocks::h1() const {
  Matrix out(Up.rows() + Uf.rows() + Yp.rows(), Up.cols());
  out << Up, Uf, Yp;
  return out;
}

Matrix HankelBlocks::stacked() const {
  Matrix out(Up.rows() + Uf.rows() + Yp.rows() + Yf.rows(), Up.cols());
  out << Up, Uf, Yp, Yf;
  return out;
}

Matrix HankelBlocks::stacked_trajectory() const {
  // col(Hu, Hy) coincides with col(Up, Uf, Yp, Yf): the past/future split
  // cuts each of Hu, Hy at a block-row boundary without reordering rows.
  return stacked();
}

Vector OnlineWindow::stacked() const {
  Vector h(u_ini.size() + u_pred.size() + y_ini.size());
  h << u_ini, u_pred, y_ini;
  return h;
}

namespace {

Matrix hankel_of(const Matrix& data, Index T) {
  const Index d = data.rows();
  const Index L = data.cols();
  const Index M = L - T + 1;
  Matrix H(d * T, M);
  for (Index j = 0; j < M; ++j) {
    for (Index k = 0; k < T; ++k) {
      H.block(k * d, j, d, 1) = data.col(j + k);
    }
  }
  return H;
}

}  // namespace

HankelPair build_hankel(const lti::Trajectory& traj, Index T) {
  if (T < 1) throw std::invalid_argument("window length must be positive");
  if (traj.u.cols() != traj.y.cols()) {
    throw std::invalid_argument("input and output lengths differ");
  }
  if (traj.u.cols() < T) {
    throw std::invalid_argument(
        "trajectory shorter than the requested window");
  }
  return {hankel_of(traj.u, T), hankel_of(traj.y, T)};
}

HankelBlocks partition(const Matrix& Hu, const Matrix& Hy, Index Tp, Index Tf,
                       Index m, Index p, Index n) {
  if (Tp < 1 || Tf < 1) {
    throw std::invalid_argument("both horizons must be at least 1");
  }
  if (m < 1 || p < 1) throw std::invalid_argument("m and p must be positive");
  const Index T = Tp + Tf;
  if (Hu.rows() != m * T) {
    throw std::invalid_argument("input Hankel rows do not match m (Tp + Tf)");
  }
  if (Hy.rows() != p * T) {
    throw std::invalid_argument("output Hankel rows do not match p (Tp + Tf)");
  }
  if (Hu.cols() != Hy.cols()) {
    throw std::invalid_argument("Hankel column counts differ");
  }
  const Index M = Hu.cols();
  HankelBlocks blocks;
  blocks.Up = Hu.topRows(m * Tp);
  blocks.Uf = Hu.bottomRows(m * Tf);
  blocks.Yp = Hy.topRows(p * Tp);
  blocks.Yf = Hy.bottomRows(p * Tf);
  blocks.config = make_hankel_config(Tp, Tf, M + T - 1, m, p, n);
  return blocks;
}

HankelBlocks make_blocks(const lti::Trajectory& traj, Index Tp, Index Tf,
                         Index n) {
  const auto pair = build_hankel(traj, Tp + Tf);
  return partition(pair.Hu, pair.Hy, Tp, Tf, traj.u.rows(), traj.y.rows(), n);
}

bool check_persistency(const Matrix& H, Index m, Index T, Index n,
                       double rel_tol) {
  if (m < 1 || T < 1 || n < 0) {
    throw std::invalid_argument("bad rank-condition parameters");
  }
  return numerics::numerical_rank(H, rel_tol) == m * T + n;
}

Matrix corrupt_output(const Matrix& y, double N, std::uint64_t seed) {
  if (N < 0) throw std::invalid_argument("noise bound must be nonnegative");
  if (N == 0) return y;
  rng::Stream stream(seed);
  Matrix out = y;
  // Column-major walk so matrix and flattened-vector corruption agree.
  for (Index j = 0; j < out.cols(); ++j) {
    for (Index i = 0; i < out.rows(); ++i) {
      out(i, j) += stream.uniform(-N, N);
    }
  }
  return out;
}

Vector corrupt_output(const Vector& y, double N, std::uint64_t seed) {
  Matrix out = corrupt_output(Matrix(y), N, seed);
  return Vector(out.col(0));
}

}  // namespace ddpred::hankel
