#include "ddpred/bounds.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ddpred/numerics.hpp"
#include "ddpred/predictor.hpp"
#include "test_util.hpp"

namespace ddpred {
namespace {

using testutil::make_scenario;

Matrix diag2(double a, double b) {
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

bounds::Dims dims1114() { return bounds::Dims{1, 1, 1, 1, 4}; }

// A stock noisy scenario shared by several cases below.
struct NoisyCase {
  hankel::HankelBlocks clean;
  hankel::HankelBlocks noisy;
  hankel::OnlineWindow window;  // noisy online data
  Vector y_clean;               // raw prediction on clean data
  Index r = 0;
  double N = 0.0;
};

NoisyCase make_noisy_case(std::uint64_t seed, double N, Index Tp = 2,
                          Index Tf = 2) {
  const Index n = 2;
  const auto s = make_scenario(n, 1, 1, Tp, Tf, 60, seed);
  NoisyCase c;
  c.N = N;
  c.clean = hankel::make_blocks(s.data, Tp, Tf, n);
  c.r = c.clean.config.r();

  lti::Trajectory noisy = s.data;
  noisy.y = hankel::corrupt_output(s.data.y, N, rng::derive(seed, {9, 0}));
  c.noisy = hankel::make_blocks(noisy, Tp, Tf, n);

  c.window = s.window;
  c.window.y_ini =
      hankel::corrupt_output(s.window.y_ini, N, rng::derive(seed, {9, 1}));
  c.y_clean = predictor::predict_raw(c.clean, s.window).y_pred;
  return c;
}

TEST(Radicals, OutputErrorAndErrorsInVariables) {
  const bounds::Dims d{2, 3, 2, 1, 10};  // m=2, p=3, Tp=2, Tf=1, M=10
  EXPECT_DOUBLE_EQ(bounds::offline_radical(d, bounds::NoiseSetting::output_error),
                   std::sqrt(3.0 * 2 * 10));
  EXPECT_DOUBLE_EQ(
      bounds::offline_radical(d, bounds::NoiseSetting::errors_in_variables),
      std::sqrt((3.0 * 2 + 2.0 * 3) * 10));
  EXPECT_DOUBLE_EQ(bounds::online_radical(d, bounds::NoiseSetting::output_error),
                   std::sqrt(6.0));
  EXPECT_DOUBLE_EQ(
      bounds::online_radical(d, bounds::NoiseSetting::errors_in_variables),
      std::sqrt(6.0 + 6.0));
  EXPECT_DOUBLE_EQ(bounds::yf_radical(d), std::sqrt(30.0));
}

TEST(Lemma1Bounds, WorkedValues) {
  const auto zero = bounds::lemma1_bounds(1, 2, 3, 10, 0.0);
  EXPECT_DOUBLE_EQ(zero.delta_bound, 0.0);
  EXPECT_DOUBLE_EQ(zero.d1_bound, 0.0);
  EXPECT_DOUBLE_EQ(zero.d2_bound, 0.0);

  const auto b = bounds::lemma1_bounds(1, 2, 3, 10, 0.5);
  EXPECT_NEAR(b.delta_bound, 0.70711, 1e-5);
  EXPECT_NEAR(b.d1_bound, 2.23607, 1e-5);
  EXPECT_NEAR(b.d2_bound, 2.73861, 1e-5);

  const auto ones = bounds::lemma1_bounds(1, 1, 1, 1, 1.0);
  EXPECT_DOUBLE_EQ(ones.delta_bound, 1.0);
  EXPECT_DOUBLE_EQ(ones.d1_bound, 1.0);
  EXPECT_DOUBLE_EQ(ones.d2_bound, 1.0);
}

TEST(DeltaSn, FormulaAndEdgeCases) {
  const Matrix a = diag2(5, 2);
  EXPECT_DOUBLE_EQ(bounds::delta_sn(a, 1, 1, 1, 4, 0.1), 4.8);
  EXPECT_DOUBLE_EQ(bounds::delta_sn(a, 1, 1, 1, 4, 0.0), 5.0);
  EXPECT_LT(bounds::delta_sn(a, 1, 1, 1, 4, 10.0), 0.0);
  EXPECT_THROW(bounds::delta_sn(a, 3, 1, 1, 4, 0.1), std::invalid_argument);
}

TEST(SigmaSq, FormulaAndInapplicability) {
  // With the margin at 4.8, the smallest nonzero singular value rules.
  const auto v = bounds::sigma_sq(diag2(5, 2), 1, 1, 1, 4, 0.1);
  ASSERT_TRUE(v.has_value());
  EXPECT_NEAR(*v, 0.25, 1e-12);

  // No noise, rank equals r: both arguments coincide at 1/sigma_min^2.
  const auto eq = bounds::sigma_sq(diag2(2, 2), 2, 1, 1, 4, 0.0);
  ASSERT_TRUE(eq.has_value());
  EXPECT_NEAR(*eq, 0.25, 1e-12);

  EXPECT_FALSE(bounds::sigma_sq(diag2(5, 2), 1, 1, 1, 4, 10.0).has_value());
}

TEST(BoundRawFromNorms, WorkedExample) {
  bounds::RawBoundInputs in;
  in.sigma_r = 5.2;
  in.sigma_min_nonzero = 5.0;
  in.h1_pinv_frob = 0.5;
  in.h1_pinv_h_norm = 0.4;
  in.yf_frob = 2.0;
  in.h_norm = 1.0;

  const auto rep = bounds::bound_raw_from_norms(in, dims1114(), 0.1, {});
  ASSERT_TRUE(rep.applicable);
  EXPECT_NEAR(*rep.delta_sn, 5.0, 1e-12);
  EXPECT_NEAR(*rep.sigma_sq, 0.04, 1e-12);
  EXPECT_NEAR(rep.term_perturbation, 0.0273791, 1e-6);
  EXPECT_NEAR(rep.term_online_noise, 0.11, 1e-12);
  EXPECT_NEAR(rep.term_offset, 0.08, 1e-12);
  EXPECT_NEAR(*rep.total, 0.21738, 1e-4);
  EXPECT_NEAR(*rep.total,
              rep.term_perturbation + rep.term_online_noise + rep.term_offset,
              1e-15);
}

TEST(BoundRawFromNorms, ZeroNoiseAndInapplicability) {
  bounds::RawBoundInputs in;
  in.sigma_r = 5.2;
  in.sigma_min_nonzero = 5.0;
  in.h1_pinv_frob = 0.5;
  in.h1_pinv_h_norm = 0.4;
  in.yf_frob = 2.0;
  in.h_norm = 1.0;

  const auto zero = bounds::bound_raw_from_norms(in, dims1114(), 0.0, {});
  ASSERT_TRUE(zero.applicable);
  EXPECT_DOUBLE_EQ(*zero.total, 0.0);

  // Noise radius swamps the r-th singular value.
  const auto off = bounds::bound_raw_from_norms(in, dims1114(), 10.0, {});
  EXPECT_FALSE(off.applicable);
  EXPECT_FALSE(off.total.has_value());
  EXPECT_LT(*off.delta_sn, 0.0);

  // The oracle variant does not need a positive margin.
  bounds::BoundVariant oracle;
  oracle.oracle_sigma_r = 5.2;
  const auto rep = bounds::bound_raw_from_norms(in, dims1114(), 10.0, oracle);
  ASSERT_TRUE(rep.applicable);
  EXPECT_TRUE(rep.total.has_value());

  // Wide-but-short data matrix: the r-th singular value may not exist.
  bounds::RawBoundInputs undef = in;
  undef.sigma_r = std::nullopt;
  EXPECT_FALSE(bounds::bound_raw_from_norms(undef, dims1114(), 0.1, {})
                   .applicable);
  EXPECT_TRUE(
      bounds::bound_raw_from_norms(undef, dims1114(), 0.1, oracle).applicable);
}

TEST(BoundTsvdFromNorms, WorkedExample) {
  bounds::TsvdBoundInputs in;
  in.sigma_r_hat = 5.2;
  in.sigma_min_h1_hat = 5.0;
  in.h1_gap_frob = 0.3;
  in.h1_hat_pinv_frob = 0.5;
  in.yf_gap_frob = 0.2;
  in.yf_hat_h1_pinv_frob = 0.6;
  in.yf_frob = 2.0;
  in.h_norm = 1.0;

  const auto rep = bounds::bound_tsvd_from_norms(in, dims1114(), 0.1, {});
  ASSERT_TRUE(rep.applicable);
  EXPECT_NEAR(*rep.delta_sn, 5.0, 1e-12);
  // The truncated form uses the margin alone for amplification.
  EXPECT_NEAR(*rep.sigma_sq, 0.04, 1e-12);
  EXPECT_NEAR(rep.term_perturbation, 0.0684479, 1e-6);
  EXPECT_NEAR(rep.term_online_noise, 0.22, 1e-12);
  EXPECT_NEAR(rep.term_offset, 0.06, 1e-12);
  EXPECT_NEAR(*rep.total, 0.3484479, 1e-6);
}

TEST(BoundRaw, CleanDataZeroNoise) {
  const auto s = make_scenario(2, 1, 1, 2, 2, 50, 700);
  const auto blocks = hankel::make_blocks(s.data, 2, 2, 2);
  const auto rep =
      bounds::bound_raw(blocks, s.window, blocks.config.r(), 0.0, {});
  ASSERT_TRUE(rep.applicable);
  EXPECT_DOUBLE_EQ(*rep.total, 0.0);
}

TEST(BoundTsvd, CleanDataAtTrueRankZeroNoise) {
  const auto s = make_scenario(2, 1, 1, 2, 2, 50, 701);
  const auto blocks = hankel::make_blocks(s.data, 2, 2, 2);
  const auto rep =
      bounds::bound_tsvd(blocks, blocks.config.r(), s.window, 0.0, {});
  ASSERT_TRUE(rep.applicable);
  EXPECT_NEAR(*rep.total, 0.0, 1e-9);
}

TEST(Bounds, ValidityAgainstGroundTruth) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = make_noisy_case(800 + seed, 1e-4);

    const Vector y_raw = predictor::predict_raw(c.noisy, c.window).y_pred;
    const auto rep1 = bounds::bound_raw(c.noisy, c.window, c.r, c.N, {});
    if (rep1.applicable) {
      EXPECT_GE(*rep1.total * (1.0 + 1e-12) + 1e-15,
                (y_raw - c.y_clean).norm())
          << "seed " << seed;
    }

    const Vector y_den = predictor::predict_tsvd(c.noisy, c.r, c.window).y_pred;
    const auto rep2 = bounds::bound_tsvd(c.noisy, c.r, c.window, c.N, {});
    if (rep2.applicable) {
      EXPECT_GE(*rep2.total * (1.0 + 1e-12) + 1e-15,
                (y_den - c.y_clean).norm())
          << "seed " << seed;
    }
  }
}

TEST(Bounds, MonotoneInNoiseLevelOnFrozenNorms) {
  bounds::RawBoundInputs in;
  in.sigma_r = 2.0;
  in.sigma_min_nonzero = 2.0;
  in.h1_pinv_frob = 0.7;
  in.h1_pinv_h_norm = 0.3;
  in.yf_frob = 3.0;
  in.h_norm = 1.5;

  bounds::TsvdBoundInputs tin;
  tin.sigma_r_hat = 2.0;
  tin.sigma_min_h1_hat = 2.0;
  tin.h1_gap_frob = 0.1;
  tin.h1_hat_pinv_frob = 0.7;
  tin.yf_gap_frob = 0.1;
  tin.yf_hat_h1_pinv_frob = 0.5;
  tin.yf_frob = 3.0;
  tin.h_norm = 1.5;

  const bounds::Dims d{1, 1, 2, 1, 12};
  double prev1 = 0.0, prev2 = 0.0;
  for (double N = 0.0; N < 0.3; N += 0.01) {
    const auto r1 = bounds::bound_raw_from_norms(in, d, N, {});
    const auto r2 = bounds::bound_tsvd_from_norms(tin, d, N, {});
    if (!r1.applicable || !r2.applicable) break;
    EXPECT_GE(*r1.total, prev1);
    EXPECT_GE(*r2.total, prev2);
    prev1 = *r1.total;
    prev2 = *r2.total;
  }
  EXPECT_GT(prev1, 0.0);
  EXPECT_GT(prev2, 0.0);
}

TEST(Bounds, OracleTightensAndEivDominates) {
  const auto c = make_noisy_case(900, 1e-4);
  const double sigma_r_clean = numerics::sigma(c.clean.h1(), c.r);

  const auto measured = bounds::bound_raw(c.noisy, c.window, c.r, c.N, {});
  bounds::BoundVariant ov;
  ov.oracle_sigma_r = sigma_r_clean;
  const auto oracle = bounds::bound_raw(c.noisy, c.window, c.r, c.N, ov);
  ASSERT_TRUE(measured.applicable);
  ASSERT_TRUE(oracle.applicable);
  EXPECT_LE(*oracle.total, *measured.total * (1.0 + 1e-12));

  bounds::BoundVariant eiv;
  eiv.noise = bounds::NoiseSetting::errors_in_variables;
  const auto eiv_rep = bounds::bound_raw(c.noisy, c.window, c.r, c.N, eiv);
  ASSERT_TRUE(eiv_rep.applicable);
  EXPECT_GE(*eiv_rep.total, *measured.total);

  const auto m2 = bounds::bound_tsvd(c.noisy, c.r, c.window, c.N, {});
  const auto e2 = bounds::bound_tsvd(c.noisy, c.r, c.window, c.N, eiv);
  ASSERT_TRUE(m2.applicable);
  ASSERT_TRUE(e2.applicable);
  EXPECT_GE(*e2.total, *m2.total);
}

TEST(LinearizedRaw, LinearFormProperties) {
  const auto c = make_noisy_case(901, 1e-6);

  const auto zero = bounds::linearized_bound_raw(c.noisy, c.window, c.r, 0.0);
  ASSERT_TRUE(zero.has_value());
  EXPECT_DOUBLE_EQ(*zero, 0.0);

  const auto v1 = bounds::linearized_bound_raw(c.noisy, c.window, c.r, 1e-6);
  const auto v2 = bounds::linearized_bound_raw(c.noisy, c.window, c.r, 2e-6);
  ASSERT_TRUE(v1.has_value());
  ASSERT_TRUE(v2.has_value());
  EXPECT_NEAR(*v2, 2.0 * *v1, 1e-12 * *v2);

  // Small-noise agreement with the full expression.
  const auto full = bounds::bound_raw(c.noisy, c.window, c.r, 1e-6, {});
  ASSERT_TRUE(full.applicable);
  EXPECT_NEAR(*v1, *full.total, 0.05 * *full.total);
}

TEST(LinearizedTsvd, DominatesFullFormAtSmallNoise) {
  const auto c = make_noisy_case(902, 1e-6);
  const auto lin = bounds::linearized_bound_tsvd(c.noisy, c.window, c.r, 1e-6);
  const auto full = bounds::bound_tsvd(c.noisy, c.r, c.window, 1e-6, {});
  ASSERT_TRUE(lin.has_value());
  ASSERT_TRUE(full.applicable);
  EXPECT_GE(*lin, *full.total * (1.0 - 1e-9));

  const auto zero = bounds::linearized_bound_tsvd(c.noisy, c.window, c.r, 0.0);
  ASSERT_TRUE(zero.has_value());
  EXPECT_DOUBLE_EQ(*zero, 0.0);
}

TEST(Linearized, InapplicableWhenMarginVanishes) {
  const auto c = make_noisy_case(903, 1e-4);
  EXPECT_FALSE(
      bounds::linearized_bound_raw(c.noisy, c.window, c.r, 1e3).has_value());
  EXPECT_FALSE(
      bounds::linearized_bound_tsvd(c.noisy, c.window, c.r, 1e3).has_value());
}

TEST(TruncationResidual, CleanCaseAndOracleDomination) {
  const auto c = make_noisy_case(904, 1e-3);

  // Noise-free: both routes collapse to zero.
  const Matrix h1_clean = c.clean.h1();
  const auto clean =
      bounds::truncation_residual_bounds(h1_clean, h1_clean, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(clean.stewart_path, 0.0);
  EXPECT_DOUBLE_EQ(clean.vu_path, 0.0);

  // Noisy: both routes bound the true truncation error.
  const auto trunc = predictor::truncate_blocks(c.noisy, c.r);
  const Matrix h1_tilde = c.noisy.h1();
  const Matrix h1_hat = trunc.h1();
  const auto& cfg = c.noisy.config;
  const auto l1 = bounds::lemma1_bounds(cfg.p, cfg.Tp, cfg.Tf, cfg.M, c.N);
  const double margin =
      bounds::delta_sn(h1_tilde, c.r, cfg.p, cfg.Tp, cfg.M, c.N);
  ASSERT_GT(margin, 0.0);
  const auto rb = bounds::truncation_residual_bounds(h1_tilde, h1_hat,
                                                     l1.d1_bound, margin);
  const double truth = numerics::frob(h1_hat - h1_clean);
  EXPECT_GE(rb.stewart_path * (1.0 + 1e-12), truth);
  EXPECT_GE(rb.vu_path * (1.0 + 1e-12), truth);

  EXPECT_THROW(
      bounds::truncation_residual_bounds(h1_tilde, h1_hat, l1.d1_bound, -1.0),
      std::domain_error);
}

TEST(TruncationResidual, ResidualRouteUsuallyTighter) {
  int stewart_wins = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto c = make_noisy_case(1000 + seed, 1e-3);
    const auto trunc = predictor::truncate_blocks(c.noisy, c.r);
    const Matrix h1_tilde = c.noisy.h1();
    const auto& cfg = c.noisy.config;
    const auto l1 = bounds::lemma1_bounds(cfg.p, cfg.Tp, cfg.Tf, cfg.M, c.N);
    const double margin =
        bounds::delta_sn(h1_tilde, c.r, cfg.p, cfg.Tp, cfg.M, c.N);
    if (!(margin > 0.0)) continue;
    const auto rb = bounds::truncation_residual_bounds(h1_tilde, trunc.h1(),
                                                       l1.d1_bound, margin);
    ++total;
    if (rb.stewart_path <= rb.vu_path) ++stewart_wins;
  }
  ASSERT_GT(total, 20);
  EXPECT_GT(stewart_wins * 2, total);
}

TEST(DivergenceFloor, FormulaAndMeasuredScenario) {
  EXPECT_DOUBLE_EQ(bounds::divergence_floor(1, 1, 4, 0.1), 5.0);
  EXPECT_LT(bounds::divergence_floor(1, 1, 4, 1e6), 1e-5);
  EXPECT_THROW(bounds::divergence_floor(1, 1, 4, 0.0), std::domain_error);

  // Past horizon longer than n/p puts the clean rank below the noisy
  // one, which provably inflates the pseudoinverse.
  const auto s = make_scenario(1, 1, 1, /*Tp=*/3, /*Tf=*/1, 40, 905);
  lti::Trajectory noisy = s.data;
  const double N = 1e-7;
  noisy.y = hankel::corrupt_output(s.data.y, N, 42);
  const auto blocks = hankel::make_blocks(noisy, 3, 1, 1);
  const double pinv_norm = numerics::frob(numerics::pinv(blocks.h1()));
  EXPECT_GE(pinv_norm,
            bounds::divergence_floor(1, 3, blocks.config.M, N));
}

TEST(RelativeGap, FormulaAndDomain) {
  EXPECT_DOUBLE_EQ(bounds::relative_gap(2.0, 1.0, 4.0), 25.0);
  EXPECT_DOUBLE_EQ(bounds::relative_gap(1.5, 1.5, 3.0), 0.0);
  EXPECT_NEAR(bounds::relative_gap(0.21738, 0.1, 1.0), 11.738, 1e-9);
  EXPECT_THROW(bounds::relative_gap(1.0, 0.5, 0.0), std::domain_error);
}

}  // namespace
}  // namespace ddpred
