#pragma once

#include "ddpred/hankel.hpp"
#include "ddpred/types.hpp"

namespace ddpred::predictor {

enum class Method { raw, tsvd };

struct PredictionResult {
  Vector y_pred;  // p Tf
  Vector g_star;  // M
  Method method = Method::raw;
  // Set when numerical_rank(col(Up, Uf, Yp)) < mT: the offline input was
  // not rich enough, so the least-squares problem is rank-deficient in a
  // way no amount of data cleaning fixes.
  bool excitation_warning = false;
};

/// Minimum-norm least-squares coefficient vector g* = pinv(H1) h.
Vector min_norm_g(const Matrix& H1, const Vector& h);

/// y_pred = Yf g* with g* fitted on col(Up, Uf, Yp). The same code path
/// serves clean and noisy blocks; the data decides what it means.
PredictionResult predict_raw(const hankel::HankelBlocks& blocks,
                             const hankel::OnlineWindow& online);

/// Rank-r truncation of the full stacked matrix, re-partitioned.
struct TruncatedBlocks {
  Matrix Up;
  Matrix Uf;
  Matrix Yp;
  Matrix Yf;

  Matrix h1() const;
};

/// SVD-truncates col(Up, Uf, Yp, Yf) to rank r and splits it back into
/// the four blocks. Throws std::invalid_argument if r is out of range.
TruncatedBlocks truncate_blocks(const hankel::HankelBlocks& blocks, Index r);

/// Denoised prediction: truncate the stacked matrix to rank r, then run
/// the raw predictor on the truncated blocks.
PredictionResult predict_tsvd(const hankel::HankelBlocks& blocks, Index r,
                              const hankel::OnlineWindow& online);

}  // namespace ddpred::predictor
