#include "ddpred/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddpred/numerics.hpp"
#include "ddpred/predictor.hpp"

namespace ddpred::bounds {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void check_dims(const Dims& d) {
  if (d.m < 1 || d.p < 1 || d.Tp < 1 || d.Tf < 1 || d.M < 1) {
    throw std::invalid_argument("all dimensions must be positive");
  }
}

void check_noise_level(double N) {
  if (!(N >= 0.0)) {
    throw std::invalid_argument("noise level must be nonnegative");
  }
}

void check_variant(const BoundVariant& variant) {
  if (variant.oracle_sigma_r && !(*variant.oracle_sigma_r > 0.0)) {
    throw std::invalid_argument("oracle singular value must be positive");
  }
}

double sq_inv(double x) { return 1.0 / (x * x); }

// Ratio saturating at 1; a vanishing reference singular value makes the
// saturation certain.
double saturation(double perturbation, double sigma) {
  if (!(sigma > 0.0)) return 1.0;
  return std::min(2.0 * perturbation / sigma, 1.0);
}

std::optional<double> sigma_r_if_defined(const Matrix& a, Index r) {
  if (r < 1) throw std::invalid_argument("rank parameter must be positive");
  if (r > std::min(a.rows(), a.cols())) return std::nullopt;
  return numerics::sigma(a, r);
}

}  // namespace

double offline_radical(const Dims& d, NoiseSetting noise) {
  check_dims(d);
  const double entries =
      noise == NoiseSetting::output_error
          ? static_cast<double>(d.p * d.Tp * d.M)
          : static_cast<double>((d.p * d.Tp + d.m * d.T()) * d.M);
  return std::sqrt(entries);
}

double online_radical(const Dims& d, NoiseSetting noise) {
  check_dims(d);
  const double entries = noise == NoiseSetting::output_error
                             ? static_cast<double>(d.p * d.Tp)
                             : static_cast<double>(d.p * d.Tp + d.m * d.T());
  return std::sqrt(entries);
}

double yf_radical(const Dims& d) {
  check_dims(d);
  return std::sqrt(static_cast<double>(d.p * d.Tf * d.M));
}

Lemma1Bounds lemma1_bounds(Index p, Index Tp, Index Tf, Index M, double N) {
  check_noise_level(N);
  const Dims d{1, p, Tp, Tf, M};
  check_dims(d);
  return {online_radical(d, NoiseSetting::output_error) * N,
          offline_radical(d, NoiseSetting::output_error) * N,
          yf_radical(d) * N};
}

double delta_sn(const Matrix& a, Index r, Index p, Index Tp, Index M,
                double N) {
  check_noise_level(N);
  const auto sr = sigma_r_if_defined(a, r);
  if (!sr) {
    throw std::invalid_argument(
        "rank parameter exceeds the matrix dimensions");
  }
  return *sr - std::sqrt(static_cast<double>(p * Tp * M)) * N;
}

std::optional<double> sigma_sq(const Matrix& a, Index r, Index p, Index Tp,
                               Index M, double N, double rel_tol) {
  const double margin = delta_sn(a, r, p, Tp, M, N);
  if (!(margin > 0.0)) return std::nullopt;
  const double smin = numerics::sigma_min_nonzero(a, rel_tol);
  return std::max(sq_inv(margin), sq_inv(smin));
}

BoundReport bound_raw_from_norms(const RawBoundInputs& in, const Dims& d,
                                 double N, BoundVariant variant) {
  check_dims(d);
  check_noise_level(N);
  check_variant(variant);
  variant.predictor = Predictor::raw;

  BoundReport rep;
  rep.variant = variant;
  const double off = offline_radical(d, variant.noise);
  const double on = online_radical(d, variant.noise);
  const double yfr = yf_radical(d);

  if (in.sigma_r) rep.delta_sn = *in.sigma_r - off * N;

  std::optional<double> amp;
  if (variant.oracle_sigma_r) {
    amp = std::max(sq_inv(*variant.oracle_sigma_r),
                   sq_inv(in.sigma_min_nonzero));
  } else if (rep.delta_sn && *rep.delta_sn > 0.0) {
    amp = std::max(sq_inv(*rep.delta_sn), sq_inv(in.sigma_min_nonzero));
  }
  if (!amp) return rep;  // not applicable

  rep.applicable = true;
  rep.sigma_sq = amp;
  rep.term_perturbation = kSqrt2 * *amp * off * N * (in.yf_frob + yfr * N) *
                          (in.h_norm + on * N);
  rep.term_online_noise = in.h1_pinv_frob * on * N * (in.yf_frob + yfr * N);
  rep.term_offset = yfr * N * in.h1_pinv_h_norm;
  rep.total = rep.term_perturbation + rep.term_online_noise + rep.term_offset;
  return rep;
}

BoundReport bound_tsvd_from_norms(const TsvdBoundInputs& in, const Dims& d,
                                  double N, BoundVariant variant) {
  check_dims(d);
  check_noise_level(N);
  check_variant(variant);
  variant.predictor = Predictor::tsvd;

  BoundReport rep;
  rep.variant = variant;
  const double off = offline_radical(d, variant.noise);
  const double on = online_radical(d, variant.noise);
  const double yfr = yf_radical(d);

  if (in.sigma_r_hat) rep.delta_sn = *in.sigma_r_hat - off * N;

  std::optional<double> amp;
  if (variant.oracle_sigma_r) {
    amp = std::max(sq_inv(*variant.oracle_sigma_r),
                   sq_inv(in.sigma_min_h1_hat));
  } else if (rep.delta_sn && *rep.delta_sn > 0.0) {
    amp = sq_inv(*rep.delta_sn);
  }
  if (!amp) return rep;

  rep.applicable = true;
  rep.sigma_sq = amp;
  rep.term_perturbation = kSqrt2 * (in.yf_frob + yfr * N) * *amp *
                          (in.h1_gap_frob + off * N) * (in.h_norm + on * N);
  rep.term_online_noise =
      in.h1_hat_pinv_frob * (in.h_norm + on * N) * (in.yf_gap_frob + yfr * N);
  rep.term_offset = in.yf_hat_h1_pinv_frob * on * N;
  rep.total = rep.term_perturbation + rep.term_online_noise + rep.term_offset;
  return rep;
}

namespace {

Dims dims_of(const hankel::HankelConfig& cfg) {
  return Dims{cfg.m, cfg.p, cfg.Tp, cfg.Tf, cfg.M};
}

}  // namespace

RawBoundInputs raw_inputs_from_factors(const numerics::SvdFactors& f, Index r,
                                       const Matrix& yf, const Vector& h) {
  RawBoundInputs in;
  if (r < 1) throw std::invalid_argument("rank parameter must be positive");
  if (r <= f.singular_values.size()) in.sigma_r = f.singular_values(r - 1);
  in.sigma_min_nonzero = numerics::sigma_min_nonzero(f);
  in.h1_pinv_frob = numerics::pinv_frob(f);
  in.h1_pinv_h_norm = numerics::apply_pinv(f, h).norm();
  in.yf_frob = numerics::frob(yf);
  in.h_norm = h.norm();
  return in;
}

TsvdBoundInputs tsvd_inputs_from_factors(const numerics::SvdFactors& f2,
                                         Index r, const Matrix& h1_hat,
                                         const Matrix& h1_tilde,
                                         const Matrix& yf_hat,
                                         const Matrix& yf_tilde,
                                         const Vector& h) {
  TsvdBoundInputs in;
  if (r < 1) throw std::invalid_argument("rank parameter must be positive");
  if (r <= f2.singular_values.size()) {
    in.sigma_r_hat = f2.singular_values(r - 1);
  }
  in.sigma_min_h1_hat = numerics::sigma_min_nonzero(f2);
  in.h1_gap_frob = numerics::frob(h1_hat - h1_tilde);
  in.h1_hat_pinv_frob = numerics::pinv_frob(f2);
  in.yf_gap_frob = numerics::frob(yf_hat - yf_tilde);
  // ||Yf_hat pinv||_F = ||Yf_hat V S^+||_F since the left factor has
  // orthonormal columns.
  const double thresh = numerics::rank_cutoff(f2);
  Matrix scaled = yf_hat * f2.right;
  for (Index i = 0; i < f2.singular_values.size(); ++i) {
    const double s = f2.singular_values(i);
    scaled.col(i) *= s > thresh ? 1.0 / s : 0.0;
  }
  in.yf_hat_h1_pinv_frob = numerics::frob(scaled);
  in.yf_frob = numerics::frob(yf_tilde);
  in.h_norm = h.norm();
  return in;
}

BoundReport bound_raw(const hankel::HankelBlocks& blocks,
                      const hankel::OnlineWindow& online, Index r, double N,
                      BoundVariant variant) {
  const Matrix h1 = blocks.h1();
  const Vector h = online.stacked();
  if (h1.rows() != h.size()) {
    throw std::invalid_argument("online window does not match the geometry");
  }
  const auto f = numerics::svd(h1);
  return bound_raw_from_norms(raw_inputs_from_factors(f, r, blocks.Yf, h),
                              dims_of(blocks.config), N, variant);
}

BoundReport bound_tsvd(const hankel::HankelBlocks& blocks, Index r,
                       const hankel::OnlineWindow& online, double N,
                       BoundVariant variant) {
  const auto trunc = predictor::truncate_blocks(blocks, r);  // validates r
  const Matrix h1_hat = trunc.h1();
  const Matrix h1_tilde = blocks.h1();
  const Vector h = online.stacked();
  if (h1_tilde.rows() != h.size()) {
    throw std::invalid_argument("online window does not match the geometry");
  }
  const auto f2 = numerics::svd(h1_hat);
  return bound_tsvd_from_norms(
      tsvd_inputs_from_factors(f2, r, h1_hat, h1_tilde, trunc.Yf, blocks.Yf,
                               h),
      dims_of(blocks.config), N, variant);
}

std::optional<double> linearized_bound_raw(const hankel::HankelBlocks& blocks,
                                           const hankel::OnlineWindow& online,
                                           Index r, double N,
                                           BoundVariant variant) {
  check_noise_level(N);
  check_variant(variant);
  const Dims d = dims_of(blocks.config);
  const Matrix h1 = blocks.h1();
  const Vector h = online.stacked();
  const double off = offline_radical(d, variant.noise);
  const double on = online_radical(d, variant.noise);
  const double yfr = yf_radical(d);

  const auto sr = sigma_r_if_defined(h1, r);
  const double smin = numerics::sigma_min_nonzero(h1);
  double amp0 = 0.0;
  if (variant.oracle_sigma_r) {
    amp0 = std::max(sq_inv(*variant.oracle_sigma_r), sq_inv(smin));
  } else {
    // Mirror the parent bound's applicability: a defined singular value
    // with positive margin.
    if (!sr || !(*sr - off * N > 0.0)) return std::nullopt;
    amp0 = std::max(sq_inv(*sr), sq_inv(smin));
  }

  const Matrix pinv = numerics::pinv(h1);
  const double slope = kSqrt2 * amp0 * off * numerics::frob(blocks.Yf) *
                           h.norm() +
                       numerics::frob(pinv) * on * numerics::frob(blocks.Yf) +
                       yfr * (pinv * h).norm();
  return slope * N;
}

std::optional<double> linearized_bound_tsvd(
    const hankel::HankelBlocks& blocks, const hankel::OnlineWindow& online,
    Index r, double N, BoundVariant variant,
    std::optional<double> oracle_sigma_r_yf) {
  check_noise_level(N);
  check_variant(variant);
  if (oracle_sigma_r_yf && !(*oracle_sigma_r_yf > 0.0)) {
    throw std::invalid_argument("oracle singular value must be positive");
  }
  const Dims d = dims_of(blocks.config);
  const auto trunc = predictor::truncate_blocks(blocks, r);
  const Matrix h1_hat = trunc.h1();
  const Vector h = online.stacked();
  const double off = offline_radical(d, variant.noise);
  const double on = online_radical(d, variant.noise);
  const double yfr = yf_radical(d);

  const auto sr_hat = sigma_r_if_defined(h1_hat, r);
  double amp = 0.0;
  if (variant.oracle_sigma_r) {
    amp = std::max(sq_inv(*variant.oracle_sigma_r),
                   sq_inv(numerics::sigma_min_nonzero(h1_hat)));
  } else {
    if (!sr_hat || !(*sr_hat - off * N > 0.0)) return std::nullopt;
    amp = sq_inv(*sr_hat - off * N);
  }

  // Plug-in singular values for the two saturation terms: the clean
  // values when supplied, otherwise their noisy stand-ins (zero when the
  // matrix has fewer than r rows, which saturates the term).
  double sigma_r_h1 = 0.0;
  if (variant.oracle_sigma_r) {
    sigma_r_h1 = *variant.oracle_sigma_r;
  } else if (const auto sr = sigma_r_if_defined(blocks.h1(), r)) {
    sigma_r_h1 = *sr;
  }
  double sigma_r_yf = 0.0;
  if (oracle_sigma_r_yf) {
    sigma_r_yf = *oracle_sigma_r_yf;
  } else if (const auto sr = sigma_r_if_defined(blocks.Yf, r)) {
    sigma_r_yf = *sr;
  }

  const double d1_bar = off * N;
  const double d2_bar = yfr * N;
  constexpr double kSatGain = 2.0 * (1.0 + kSqrt2);
  const Matrix pinv_hat = numerics::pinv(h1_hat);
  const double slope =
      kSqrt2 * numerics::frob(blocks.Yf) * amp * off *
          (kSatGain * saturation(d1_bar, sigma_r_h1) + 2.0) * h.norm() +
      numerics::frob(pinv_hat) * h.norm() * yfr *
          (kSatGain * saturation(d2_bar, sigma_r_yf) + 2.0) +
      numerics::frob(trunc.Yf * pinv_hat) * on;
  return slope * N;
}

TruncationResidualBounds truncation_residual_bounds(const Matrix& h1_tilde,
                                                    const Matrix& h1_hat,
                                                    double delta1_norm_bound,
                                                    double delta_sn_h1_tilde) {
  if (h1_tilde.rows() != h1_hat.rows() || h1_tilde.cols() != h1_hat.cols()) {
    throw std::invalid_argument("matrices must have equal dimensions");
  }
  if (!(delta1_norm_bound >= 0.0)) {
    throw std::invalid_argument("perturbation bound must be nonnegative");
  }
  TruncationResidualBounds out{};
  out.stewart_path = numerics::frob(h1_hat - h1_tilde) + delta1_norm_bound;
  if (delta1_norm_bound == 0.0) {
    out.vu_path = 0.0;
    return out;
  }
  if (!(delta_sn_h1_tilde > 0.0)) {
    throw std::domain_error(
        "signal-to-noise margin must be positive for the saturation route");
  }
  out.vu_path = 2.0 * delta1_norm_bound +
                2.0 * (1.0 + kSqrt2) * delta1_norm_bound *
                    saturation(delta1_norm_bound, delta_sn_h1_tilde);
  return out;
}

double divergence_floor(Index p, Index Tp, Index M, double N) {
  if (p < 1 || Tp < 1 || M < 1) {
    throw std::invalid_argument("dimensions must be positive");
  }
  if (!(N > 0.0)) {
    throw std::domain_error("noise level must be positive");
  }
  return 1.0 / (N * std::sqrt(static_cast<double>(p * Tp * M)));
}

double relative_gap(double rhs, double lhs, double norm_y_pred) {
  if (!(norm_y_pred > 0.0)) {
    throw std::domain_error("prediction norm must be positive");
  }
  return (rhs - lhs) / norm_y_pred * 100.0;
}

}  // namespace ddpred::bounds
