#include "ddpred/numerics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ddpred::numerics {

namespace {

using Svd = Eigen::JacobiSVD<Matrix>;

Svd compute_svd(const Matrix& a, unsigned options) {
  if (a.rows() < 1 || a.cols() < 1) {
    throw std::invalid_argument("svd: matrix must be at least 1x1");
  }
  if (!a.allFinite()) {
    throw std::invalid_argument("svd: matrix has non-finite entries");
  }
  Svd dec(a, options);
  if (dec.info() != Eigen::Success || !dec.singularValues().allFinite()) {
    throw NumericalError("svd: decomposition did not converge");
  }
  return dec;
}

double cutoff(const Vector& sv, double rel_tol, Index rows, Index cols) {
  if (rel_tol < 0.0) {
    rel_tol = std::numeric_limits<double>::epsilon() *
              static_cast<double>(std::max(rows, cols));
  }
  return rel_tol * (sv.size() > 0 ? sv(0) : 0.0);
}

}  // namespace

double default_rank_tol(const Matrix& a) {
  return std::numeric_limits<double>::epsilon() *
         static_cast<double>(std::max(a.rows(), a.cols()));
}

SvdFactors svd(const Matrix& a) {
  Svd dec = compute_svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdFactors{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

Matrix pinv(const Matrix& a, double rel_tol) {
  Svd dec = compute_svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = dec.singularValues();
  const double thresh = cutoff(sv, rel_tol, a.rows(), a.cols());
  Vector inv = Vector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) inv(i) = 1.0 / sv(i);
  }
  return dec.matrixV() * inv.asDiagonal() * dec.matrixU().transpose();
}

Vector lstsq_min_norm(const Matrix& a, const Vector& b, double rel_tol) {
  if (b.size() != a.rows()) {
    throw std::invalid_argument("lstsq_min_norm: rhs length must equal row count");
  }
  Svd dec = compute_svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = dec.singularValues();
  const double thresh = cutoff(sv, rel_tol, a.rows(), a.cols());
  Vector coeffs = dec.matrixU().transpose() * b;
  for (Index i = 0; i < sv.size(); ++i) {
    coeffs(i) = sv(i) > thresh ? coeffs(i) / sv(i) : 0.0;
  }
  return dec.matrixV() * coeffs;
}

Matrix tsvd(const Matrix& a, Index r) {
  if (r < 1 || r > std::min(a.rows(), a.cols())) {
    throw std::invalid_argument("tsvd: rank out of range");
  }
  Svd dec = compute_svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return dec.matrixU().leftCols(r) *
         dec.singularValues().head(r).asDiagonal() *
         dec.matrixV().leftCols(r).transpose();
}

double sigma(const Matrix& a, Index i) {
  if (i < 1 || i > std::min(a.rows(), a.cols())) {
    throw std::invalid_argument("sigma: index out of range");
  }
  Svd dec = compute_svd(a, 0);
  return dec.singularValues()(i - 1);
}

double sigma_min_nonzero(const Matrix& a, double rel_tol) {
  Svd dec = compute_svd(a, 0);
  const Vector& sv = dec.singularValues();
  const double thresh = cutoff(sv, rel_tol, a.rows(), a.cols());
  double smallest = -1.0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) smallest = sv(i);
  }
  if (smallest < 0.0) {
    throw std::domain_error("sigma_min_nonzero: matrix is numerically zero");
  }
  return smallest;
}

Index numerical_rank(const Matrix& a, double rel_tol) {
  Svd dec = compute_svd(a, 0);
  const Vector& sv = dec.singularValues();
  const double thresh = cutoff(sv, rel_tol, a.rows(), a.cols());
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > thresh) ++rank;
  }
  return rank;
}

double frob(const Matrix& a) { return a.norm(); }

double rank_cutoff(const SvdFactors& f, double rel_tol) {
  return cutoff(f.singular_values, rel_tol, f.left.rows(), f.right.rows());
}

double sigma_min_nonzero(const SvdFactors& f, double rel_tol) {
  const double thresh = rank_cutoff(f, rel_tol);
  double smallest = -1.0;
  for (Index i = 0; i < f.singular_values.size(); ++i) {
    if (f.singular_values(i) > thresh) smallest = f.singular_values(i);
  }
  if (smallest < 0.0) {
    throw std::domain_error("sigma_min_nonzero: matrix is numerically zero");
  }
  return smallest;
}

Index numerical_rank(const SvdFactors& f, double rel_tol) {
  const double thresh = rank_cutoff(f, rel_tol);
  Index rank = 0;
  for (Index i = 0; i < f.singular_values.size(); ++i) {
    if (f.singular_values(i) > thresh) ++rank;
  }
  return rank;
}

double pinv_frob(const SvdFactors& f, double rel_tol) {
  const double thresh = rank_cutoff(f, rel_tol);
  double sum = 0.0;
  for (Index i = 0; i < f.singular_values.size(); ++i) {
    const double s = f.singular_values(i);
    if (s > thresh) sum += 1.0 / (s * s);
  }
  return std::sqrt(sum);
}

Vector apply_pinv(const SvdFactors& f, const Vector& b, double rel_tol) {
  if (b.size() != f.left.rows()) {
    throw std::invalid_argument("apply_pinv: rhs length must equal row count");
  }
  const double thresh = rank_cutoff(f, rel_tol);
  Vector coeffs = f.left.transpose() * b;
  for (Index i = 0; i < f.singular_values.size(); ++i) {
    const double s = f.singular_values(i);
    coeffs(i) = s > thresh ? coeffs(i) / s : 0.0;
  }
  return f.right * coeffs;
}

}  // namespace ddpred::numerics
