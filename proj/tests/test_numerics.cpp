#include "ddpred/numerics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ddpred/hankel.hpp"
#include "ddpred/lti.hpp"
#include "test_util.hpp"

namespace ddpred {
namespace {

using numerics::frob;
using testutil::random_matrix;
using testutil::random_rank_matrix;

Matrix diag2(double a, double b) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

TEST(Svd, DiagonalAndZero) {
  const auto f = numerics::svd(diag2(3, 1));
  ASSERT_EQ(f.singular_values.size(), 2);
  EXPECT_DOUBLE_EQ(f.singular_values(0), 3.0);
  EXPECT_DOUBLE_EQ(f.singular_values(1), 1.0);

  const auto z = numerics::svd(Matrix::Zero(2, 2));
  EXPECT_DOUBLE_EQ(z.singular_values(0), 0.0);
  EXPECT_DOUBLE_EQ(z.singular_values(1), 0.0);
}

TEST(Svd, HandComputedSpectrum) {
  Matrix a(2, 2);
  a << 1, 0, 1, 1;
  const auto f = numerics::svd(a);
  EXPECT_NEAR(f.singular_values(0), 1.6180, 1e-3);
  EXPECT_NEAR(f.singular_values(1), 0.6180, 1e-3);
}

TEST(Svd, FactorInvariants) {
  rng::Stream st(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Index rows = 2 + trial % 7;
    const Index cols = 2 + (trial * 3) % 8;
    const Matrix a = random_matrix(rows, cols, st);
    const auto f = numerics::svd(a);

    for (Index i = 0; i + 1 < f.singular_values.size(); ++i) {
      EXPECT_GE(f.singular_values(i), f.singular_values(i + 1));
    }
    const Matrix rebuilt =
        f.left * f.singular_values.asDiagonal() * f.right.transpose();
    EXPECT_LE(frob(rebuilt - a), 1e-10 * (1.0 + frob(a)));

    const Index k = f.singular_values.size();
    EXPECT_LE(frob(f.left.transpose() * f.left - Matrix::Identity(k, k)),
              1e-10);
    EXPECT_LE(frob(f.right.transpose() * f.right - Matrix::Identity(k, k)),
              1e-10);
  }
}

TEST(Svd, RejectsNonFinite) {
  Matrix a = Matrix::Ones(2, 2);
  a(1, 1) = std::nan("");
  EXPECT_THROW(numerics::svd(a), std::invalid_argument);
}

TEST(Pinv, SmallCases) {
  EXPECT_LE(frob(numerics::pinv(diag2(2, 0)) - diag2(0.5, 0)), 1e-14);
  EXPECT_LE(frob(numerics::pinv(Matrix::Identity(3, 3)) -
                 Matrix::Identity(3, 3)),
            1e-14);

  Matrix col(2, 1);
  col << 1, 1;
  Matrix row(1, 2);
  row << 0.5, 0.5;
  EXPECT_LE(frob(numerics::pinv(col) - row), 1e-14);
}

TEST(Pinv, PenroseIdentities) {
  rng::Stream st(12);
  for (int trial = 0; trial < 50; ++trial) {
    const Index rows = 2 + trial % 6;
    const Index cols = 2 + (trial * 5) % 7;
    const Index rank = 1 + trial % std::min(rows, cols);
    const Matrix a = random_rank_matrix(rows, cols, rank, st);
    const Matrix ap = numerics::pinv(a);
    const double scale = 1.0 + frob(a);
    EXPECT_LE(frob(a * ap * a - a), 1e-8 * scale);
    EXPECT_LE(frob(ap * a * ap - ap), 1e-8 * (1.0 + frob(ap)));
    // The two projector identities (symmetry of A A+ and A+ A).
    EXPECT_LE(frob((a * ap) - (a * ap).transpose()), 1e-8 * scale);
    EXPECT_LE(frob((ap * a) - (ap * a).transpose()), 1e-8 * scale);
  }
}

TEST(Lstsq, MatchesPinvApply) {
  rng::Stream st(13);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_rank_matrix(5, 7, 3, st);
    Vector b(5);
    for (Index i = 0; i < 5; ++i) b(i) = st.uniform(-1, 1);
    const Vector x = numerics::lstsq_min_norm(a, b);
    EXPECT_LE((x - numerics::pinv(a) * b).norm(), 1e-10);

    const auto f = numerics::svd(a);
    EXPECT_LE((numerics::apply_pinv(f, b) - x).norm(), 1e-12);
  }
}

TEST(Tsvd, SmallCases) {
  EXPECT_LE(frob(numerics::tsvd(diag2(3, 1), 1) - diag2(3, 0)), 1e-12);

  rng::Stream st(14);
  const Matrix rank1 = random_rank_matrix(4, 5, 1, st);
  EXPECT_LE(frob(numerics::tsvd(rank1, 1) - rank1), 1e-10 * (1 + frob(rank1)));

  Matrix a(2, 2);
  a << 1, 0, 1, 1;
  EXPECT_NEAR(frob(a - numerics::tsvd(a, 1)), 0.6180, 1e-3);

  EXPECT_THROW(numerics::tsvd(a, 0), std::invalid_argument);
  EXPECT_THROW(numerics::tsvd(a, 3), std::invalid_argument);
}

TEST(Tsvd, EckartYoungResidual) {
  rng::Stream st(15);
  for (int trial = 0; trial < 50; ++trial) {
    const Index rows = 3 + trial % 5;
    const Index cols = 3 + (trial * 7) % 6;
    const Matrix a = random_matrix(rows, cols, st);
    const auto f = numerics::svd(a);
    for (Index r = 1; r <= f.singular_values.size(); ++r) {
      double tail = 0.0;
      for (Index i = r; i < f.singular_values.size(); ++i) {
        tail += f.singular_values(i) * f.singular_values(i);
      }
      const double residual = frob(a - numerics::tsvd(a, r));
      EXPECT_NEAR(residual * residual, tail, 1e-9 * (1.0 + tail));
    }
  }
}

TEST(Tsvd, TruncationAtNumericalRankIsIdentity) {
  rng::Stream st(16);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_rank_matrix(6, 8, 1 + trial % 6, st);
    const Index r = numerics::numerical_rank(a);
    EXPECT_LE(frob(numerics::tsvd(a, r) - a), 1e-9 * (1.0 + frob(a)));
  }
}

TEST(Queries, DiagonalAndZero) {
  const Matrix d = diag2(3, 1);
  EXPECT_DOUBLE_EQ(numerics::sigma(d, 1), 3.0);
  EXPECT_DOUBLE_EQ(numerics::sigma(d, 2), 1.0);
  EXPECT_DOUBLE_EQ(numerics::sigma_min_nonzero(d), 1.0);
  EXPECT_EQ(numerics::numerical_rank(d), 2);
  EXPECT_NEAR(numerics::frob(d), std::sqrt(10.0), 1e-14);

  EXPECT_EQ(numerics::numerical_rank(Matrix::Zero(3, 4)), 0);
  EXPECT_THROW(numerics::sigma_min_nonzero(Matrix::Zero(3, 4)),
               std::domain_error);
}

TEST(Queries, HankelRankOfCleanFirstOrderData) {
  // Noise-free scalar data with window length 2 spans a 3-dimensional
  // column space: rank = m*T + n = 1*2 + 1.
  const auto sys = lti::random_stable_system(1, 1, 1, 99);
  rng::Stream st(17);
  lti::Trajectory traj;
  traj.u = random_matrix(1, 40, st);
  traj.y = lti::simulate(sys, Vector::Zero(1), traj.u);
  const auto pair = hankel::build_hankel(traj, 2);
  Matrix h(pair.Hu.rows() + pair.Hy.rows(), pair.Hu.cols());
  h << pair.Hu, pair.Hy;
  EXPECT_EQ(numerics::numerical_rank(h), 3);
}

TEST(Queries, FactorOverloadsMatchMatrixOverloads) {
  rng::Stream st(18);
  const Matrix a = random_rank_matrix(6, 9, 4, st);
  const auto f = numerics::svd(a);
  EXPECT_EQ(numerics::numerical_rank(f), numerics::numerical_rank(a));
  EXPECT_DOUBLE_EQ(numerics::sigma_min_nonzero(f),
                   numerics::sigma_min_nonzero(a));
  EXPECT_NEAR(numerics::pinv_frob(f), frob(numerics::pinv(a)), 1e-10);
}

TEST(Weyl, SingularValuePerturbation) {
  rng::Stream st(19);
  for (int trial = 0; trial < 100; ++trial) {
    const Index rows = 3 + trial % 5;
    const Index cols = 3 + (trial * 3) % 5;
    const Matrix a = random_matrix(rows, cols, st);
    const Matrix e = random_matrix(rows, cols, st, -0.1, 0.1);
    const auto sa = numerics::svd(a).singular_values;
    const auto sae = numerics::svd(a + e).singular_values;
    const double enorm = numerics::sigma(e, 1);
    for (Index i = 0; i < sa.size(); ++i) {
      EXPECT_LE(std::abs(sae(i) - sa(i)), enorm + 1e-10);
    }
  }
}

}  // namespace
}  // namespace ddpred
