#pragma once

#include <cstdint>

#include "ddpred/lti.hpp"
#include "ddpred/types.hpp"

namespace ddpred::hankel {

/// Window geometry shared by the Hankel blocks and the online data.
/// `n` is the assumed model order used by the rank condition; 0 means
/// "unknown" and only forbids calls that need r.
struct HankelConfig {
  Index T = 0;    // window length, T = Tp + Tf
  Index Tp = 0;   // past horizon
  Index Tf = 0;   // future horizon
  Index L = 0;    // trajectory length
  Index M = 0;    // column count, L - T + 1
  Index m = 0;    // inputs
  Index p = 0;    // outputs
  Index n = 0;    // model order (0 = unknown)

  Index r() const { return m * T + n; }
};

/// Validates the invariants (T = Tp + Tf, horizons >= 1, L >= T,
/// M = L - T + 1, positive dimensions) and returns the config.
/// Throws std::invalid_argument on violation.
HankelConfig make_hankel_config(Index Tp, Index Tf, Index L, Index m, Index p,
                                Index n = 0);

/// Past/future partition of the input and output Hankel matrices.
struct HankelBlocks {
  Matrix Up;  // m Tp x M
  Matrix Uf;  // m Tf x M
  Matrix Yp;  // p Tp x M
  Matrix Yf;  // p Tf x M
  HankelConfig config;

  /// col(Up, Uf, Yp) — the data matrix the predictor inverts.
  Matrix h1() const;
  /// col(Up, Uf, Yp, Yf) — partitioned row order.
  Matrix stacked() const;
  /// col(Hu, Hy) — original trajectory row order.
  Matrix stacked_trajectory() const;
};

/// Online data for one prediction task.
struct OnlineWindow {
  Vector u_ini;   // m Tp
  Vector u_pred;  // m Tf
  Vector y_ini;   // p Tp

  /// col(u_ini, u_pred, y_ini), length mT + p Tp.
  Vector stacked() const;
};

struct HankelPair {
  Matrix Hu;  // m T x M
  Matrix Hy;  // p T x M
};

/// Block-Hankel matrices of order T: column j of Hu holds
/// u(j), ..., u(j+T-1) stacked. Throws std::invalid_argument if L < T.
HankelPair build_hankel(const lti::Trajectory& traj, Index T);

/// Splits Hu/Hy at the past/future boundary. Both horizons must be
/// at least one.
HankelBlocks partition(const Matrix& Hu, const Matrix& Hy, Index Tp, Index Tf,
                       Index m, Index p, Index n = 0);

/// build_hankel + partition in one call.
HankelBlocks make_blocks(const lti::Trajectory& traj, Index Tp, Index Tf,
                         Index n = 0);

/// True iff numerical_rank(H, tol) equals mT + n.
bool check_persistency(const Matrix& H, Index m, Index T, Index n,
                       double rel_tol = -1.0);

/// Adds i.i.d. uniform(-N, N) noise to every entry; deterministic in
/// `seed`. N must be nonnegative.
Matrix corrupt_output(const Matrix& y, double N, std::uint64_t seed);
Vector corrupt_output(const Vector& y, double N, std::uint64_t seed);

}  // namespace ddpred::hankel
