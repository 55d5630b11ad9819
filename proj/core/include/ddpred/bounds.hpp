#pragma once

#include <optional>

#include "ddpred/hankel.hpp"
#include "ddpred/numerics.hpp"
#include "ddpred/types.hpp"

namespace ddpred::bounds {

enum class Predictor { raw, tsvd };

/// Which measurements carry noise. Under output_error only the outputs
/// are corrupted; under errors_in_variables the inputs are too, with the
/// same per-entry magnitude bound, which enlarges two of the three
/// noise radicals.
enum class NoiseSetting { output_error, errors_in_variables };

struct BoundVariant {
  Predictor predictor = Predictor::raw;
  NoiseSetting noise = NoiseSetting::output_error;
  // Exact r-th singular value of the noise-free data matrix, when known.
  // Supplying it tightens the amplification factor and removes the
  // positive-margin requirement. Must be > 0.
  std::optional<double> oracle_sigma_r;
};

/// One evaluated bound. `applicable` is false when the signal-to-noise
/// margin is nonpositive or when the r-th singular value of the data
/// matrix does not exist (fewer than r rows); in that case `total` is
/// absent and the terms are zero.
struct BoundReport {
  BoundVariant variant;
  bool applicable = false;
  std::optional<double> delta_sn;  // sigma_r minus the offline noise radius
  std::optional<double> sigma_sq;  // amplification factor actually used
  double term_perturbation = 0.0;  // data-matrix perturbation term
  double term_online_noise = 0.0;  // online-window noise term
  double term_offset = 0.0;        // future-output noise term
  std::optional<double> total;
};

/// Problem dimensions entering the noise radicals.
struct Dims {
  Index m = 0;
  Index p = 0;
  Index Tp = 0;
  Index Tf = 0;
  Index M = 0;

  Index T() const { return Tp + Tf; }
};

/// Worst-case Frobenius/2-norm radius of the offline data perturbation,
/// per unit noise level: sqrt(p Tp M), or sqrt((p Tp + m T) M) when the
/// inputs are noisy too.
double offline_radical(const Dims& d, NoiseSetting noise);
/// Radius of the online-window perturbation per unit noise level:
/// sqrt(p Tp), or sqrt(p Tp + m T) under input noise.
double online_radical(const Dims& d, NoiseSetting noise);
/// Radius of the future-output block perturbation: sqrt(p Tf M).
double yf_radical(const Dims& d);

struct Lemma1Bounds {
  double delta_bound;  // online window, 2-norm
  double d1_bound;     // past-output block, Frobenius
  double d2_bound;     // future-output block, Frobenius
};

/// Worst-case perturbation norms under entrywise noise of magnitude N.
Lemma1Bounds lemma1_bounds(Index p, Index Tp, Index Tf, Index M, double N);

/// Signal-to-noise margin sigma_r(a) - sqrt(p Tp M) N. May be negative.
/// Throws std::invalid_argument if r exceeds the dimensions of a.
double delta_sn(const Matrix& a, Index r, Index p, Index Tp, Index M,
                double N);

/// Amplification factor max{ 1/margin^2, 1/sigma_min^2 } with sigma_min
/// taken over the numerically nonzero singular values. Empty when the
/// margin is nonpositive.
std::optional<double> sigma_sq(const Matrix& a, Index r, Index p, Index Tp,
                               Index M, double N, double rel_tol = -1.0);

/// Norm-level inputs for the raw-predictor bound; every field is a
/// quantity measured from noisy data. sigma_r is empty when the data
/// matrix has fewer than r rows, in which case only oracle variants are
/// applicable.
struct RawBoundInputs {
  std::optional<double> sigma_r;   // r-th singular value of the data matrix
  double sigma_min_nonzero = 0.0;  // smallest nonzero singular value
  double h1_pinv_frob = 0.0;       // Frobenius norm of the pseudoinverse
  double h1_pinv_h_norm = 0.0;     // norm of pinv applied to the window
  double yf_frob = 0.0;            // Frobenius norm of the future block
  double h_norm = 0.0;             // 2-norm of the stacked online window
};

BoundReport bound_raw_from_norms(const RawBoundInputs& in, const Dims& d,
                                 double N, BoundVariant variant);

/// Norm-level inputs for the truncated-predictor bound. "hat" quantities
/// come from the rank-r truncation of the stacked data matrix.
struct TsvdBoundInputs {
  std::optional<double> sigma_r_hat;  // r-th singular value of truncated H1
  double sigma_min_h1_hat = 0.0;     // smallest nonzero singular value of it
  double h1_gap_frob = 0.0;          // ||truncated H1 - noisy H1||_F
  double h1_hat_pinv_frob = 0.0;     // Frobenius norm of its pseudoinverse
  double yf_gap_frob = 0.0;          // ||truncated Yf - noisy Yf||_F
  double yf_hat_h1_pinv_frob = 0.0;  // ||truncated Yf * pinv||_F
  double yf_frob = 0.0;              // Frobenius norm of noisy Yf
  double h_norm = 0.0;               // 2-norm of the online window
};

BoundReport bound_tsvd_from_norms(const TsvdBoundInputs& in, const Dims& d,
                                  double N, BoundVariant variant);

/// Builders for the norm-level inputs from a precomputed decomposition
/// of the data matrix, letting callers share one SVD across prediction
/// and bounding. `f`/`f2` must factor col(Up, Uf, Yp) of the noisy
/// respectively truncated blocks; `h` is the stacked online window.
RawBoundInputs raw_inputs_from_factors(const numerics::SvdFactors& f, Index r,
                                       const Matrix& yf, const Vector& h);
TsvdBoundInputs tsvd_inputs_from_factors(const numerics::SvdFactors& f2,
                                         Index r, const Matrix& h1_hat,
                                         const Matrix& h1_tilde,
                                         const Matrix& yf_hat,
                                         const Matrix& yf_tilde,
                                         const Vector& h);

/// Worst-case bound on the raw prediction error, evaluated from noisy
/// blocks and a noisy online window. r is the assumed rank mT + n.
BoundReport bound_raw(const hankel::HankelBlocks& blocks,
                      const hankel::OnlineWindow& online, Index r, double N,
                      BoundVariant variant = {});

/// Worst-case bound on the rank-r truncated prediction error.
BoundReport bound_tsvd(const hankel::HankelBlocks& blocks, Index r,
                       const hankel::OnlineWindow& online, double N,
                       BoundVariant variant = {});

/// Small-noise linear approximations: slope * N with the slope built
/// from measured norms. Empty when the parent bound is inapplicable.
/// `oracle_sigma_r_yf` optionally supplies the r-th singular value of
/// the clean future block used inside the truncated form's saturation
/// term; by default the noisy value stands in.
std::optional<double> linearized_bound_raw(const hankel::HankelBlocks& blocks,
                                           const hankel::OnlineWindow& online,
                                           Index r, double N,
                                           BoundVariant variant = {});
std::optional<double> linearized_bound_tsvd(
    const hankel::HankelBlocks& blocks, const hankel::OnlineWindow& online,
    Index r, double N, BoundVariant variant = {},
    std::optional<double> oracle_sigma_r_yf = std::nullopt);

struct TruncationResidualBounds {
  double stewart_path;  // residual-plus-perturbation route
  double vu_path;       // saturation-term route
};

/// Two candidate upper bounds on the distance between the truncated and
/// the noise-free data matrix. `delta1_norm_bound` is the worst-case
/// perturbation norm (lemma1_bounds().d1_bound); `delta_sn_h1_tilde`
/// must be positive for the saturation route unless the perturbation
/// bound is zero. Throws std::domain_error otherwise.
TruncationResidualBounds truncation_residual_bounds(const Matrix& h1_tilde,
                                                    const Matrix& h1_hat,
                                                    double delta1_norm_bound,
                                                    double delta_sn_h1_tilde);

/// Proven lower bound 1 / (N sqrt(p Tp M)) on the pseudoinverse norm of
/// the noisy data matrix when the noise lifts its rank above r.
/// Throws std::domain_error if N <= 0.
double divergence_floor(Index p, Index Tp, Index M, double N);

/// Percentage tightness diagnostic: (rhs - lhs) / norm_y_pred * 100.
double relative_gap(double rhs, double lhs, double norm_y_pred);

}  // namespace ddpred::bounds
