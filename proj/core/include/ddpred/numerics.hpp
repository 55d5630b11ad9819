#pragma once

#include "ddpred/types.hpp"

namespace ddpred::numerics {

/// Thin SVD, A = left * diag(singular_values) * right^T.
/// Columns of left/right are orthonormal; singular values are
/// nonincreasing and nonnegative.
struct SvdFactors {
  Matrix left;
  Vector singular_values;
  Matrix right;
};

/// Relative rank cutoff used repo-wide when the caller does not supply
/// one: machine epsilon times max(rows, cols). Singular values below
/// cutoff * sigma_max are treated as zero.
double default_rank_tol(const Matrix& a);

/// Thin SVD. Deterministic for a fixed input. Throws NumericalError if
/// the decomposition fails to converge or returns non-finite factors,
/// and std::invalid_argument if `a` has non-finite entries.
SvdFactors svd(const Matrix& a);

/// Moore-Penrose pseudoinverse. Singular values below rel_tol * sigma_max
/// are treated as zero; rel_tol < 0 selects default_rank_tol(a).
Matrix pinv(const Matrix& a, double rel_tol = -1.0);

/// Minimum-norm least-squares solution of a * x = b, identical to
/// pinv(a, rel_tol) * b but without forming the pseudoinverse.
Vector lstsq_min_norm(const Matrix& a, const Vector& b, double rel_tol = -1.0);

/// Best Frobenius rank-<=r approximation (truncated SVD).
/// Throws std::invalid_argument unless 1 <= r <= min(rows, cols).
Matrix tsvd(const Matrix& a, Index r);

/// i-th largest singular value, 1-based. i must lie in [1, min(rows, cols)].
double sigma(const Matrix& a, Index i);

/// Smallest singular value above the rank cutoff. Throws
/// std::domain_error when the matrix is numerically zero.
double sigma_min_nonzero(const Matrix& a, double rel_tol = -1.0);

/// Number of singular values above the rank cutoff.
Index numerical_rank(const Matrix& a, double rel_tol = -1.0);

/// Frobenius norm.
double frob(const Matrix& a);

/// Factor-based overloads, so several derived quantities can share one
/// decomposition. Original dimensions are recovered from the factor
/// shapes; rel_tol semantics match the matrix overloads.

/// Absolute threshold below which singular values count as zero.
double rank_cutoff(const SvdFactors& f, double rel_tol = -1.0);
double sigma_min_nonzero(const SvdFactors& f, double rel_tol = -1.0);
Index numerical_rank(const SvdFactors& f, double rel_tol = -1.0);
/// Frobenius norm of the pseudoinverse, without forming it.
double pinv_frob(const SvdFactors& f, double rel_tol = -1.0);
/// pinv(a) * b computed from the factors of a.
Vector apply_pinv(const SvdFactors& f, const Vector& b, double rel_tol = -1.0);

}  // namespace ddpred::numerics
