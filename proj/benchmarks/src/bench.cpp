// Microbenchmarks for the hot paths: SVD-backed kernels at the block sizes
// the batch experiments actually produce, the two predictors, and both
// error bounds end to end.

#include <benchmark/benchmark.h>

#include "ddpred/bounds.hpp"
#include "ddpred/hankel.hpp"
#include "ddpred/lti.hpp"
#include "ddpred/numerics.hpp"
#include "ddpred/predictor.hpp"
#include "ddpred/rng.hpp"
#include "ddpred/types.hpp"

namespace {

using namespace ddpred;

struct Fixture {
  lti::StateSpace sys;
  hankel::HankelBlocks blocks;
  hankel::OnlineWindow window;
  Index r = 0;

  Fixture() {
    const Index n = 2, m = 1, p = 1, Tp = 2, Tf = 3, L = 100;
    sys = lti::random_stable_system(n, m, p, 12345);
    rng::Stream st(rng::derive(12345, {1}));
    lti::Trajectory traj;
    traj.u = Matrix(m, L);
    for (Index t = 0; t < L; ++t) traj.u(0, t) = st.uniform(-1, 1);
    traj.y = lti::simulate(sys, Vector::Zero(n), traj.u);
    traj.y = hankel::corrupt_output(traj.y, 1e-5, rng::derive(12345, {2}));
    blocks = hankel::make_blocks(traj, Tp, Tf, n);
    r = blocks.config.r();

    Matrix u_win(m, Tp + Tf);
    for (Index t = 0; t < Tp + Tf; ++t) u_win(0, t) = st.uniform(-1, 1);
    Vector x0(n);
    x0 << 0.3, -0.2;
    const Matrix y_win = lti::simulate(sys, x0, u_win);
    window.u_ini = u_win.leftCols(Tp).reshaped();
    window.u_pred = u_win.rightCols(Tf).reshaped();
    window.y_ini = y_win.leftCols(Tp).reshaped();
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void bm_svd(benchmark::State& state) {
  const Matrix a = fixture().blocks.stacked();
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::svd(a));
  }
}
BENCHMARK(bm_svd);

void bm_pinv(benchmark::State& state) {
  const Matrix a = fixture().blocks.h1();
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::pinv(a));
  }
}
BENCHMARK(bm_pinv);

void bm_tsvd(benchmark::State& state) {
  const Matrix a = fixture().blocks.stacked();
  const Index r = fixture().r;
  for (auto _ : state) {
    benchmark::DoNotOptimize(numerics::tsvd(a, r));
  }
}
BENCHMARK(bm_tsvd);

void bm_predict_raw(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(predictor::predict_raw(f.blocks, f.window));
  }
}
BENCHMARK(bm_predict_raw);

void bm_predict_tsvd(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(predictor::predict_tsvd(f.blocks, f.r, f.window));
  }
}
BENCHMARK(bm_predict_tsvd);

void bm_bound_raw(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bounds::bound_raw(f.blocks, f.window, f.r, 1e-5, {}));
  }
}
BENCHMARK(bm_bound_raw);

void bm_bound_tsvd(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        bounds::bound_tsvd(f.blocks, f.r, f.window, 1e-5, {}));
  }
}
BENCHMARK(bm_bound_tsvd);

// One full scenario cell: simulate, corrupt, block, predict both ways,
// evaluate both bounds. Mirrors the per-cell work of the batch driver.
void bm_scenario_cell(benchmark::State& state) {
  std::uint64_t seed = 99;
  for (auto _ : state) {
    const Index n = 2, m = 1, p = 1, Tp = 2, Tf = 3, L = 100;
    const auto sys = lti::random_stable_system(n, m, p, seed);
    rng::Stream st(rng::derive(seed, {1}));
    lti::Trajectory traj;
    traj.u = Matrix(m, L);
    for (Index t = 0; t < L; ++t) traj.u(0, t) = st.uniform(-1, 1);
    traj.y = lti::simulate(sys, Vector::Zero(n), traj.u);
    traj.y = hankel::corrupt_output(traj.y, 1e-5, rng::derive(seed, {2}));
    const auto blocks = hankel::make_blocks(traj, Tp, Tf, n);
    const Index r = blocks.config.r();

    Matrix u_win(m, Tp + Tf);
    for (Index t = 0; t < Tp + Tf; ++t) u_win(0, t) = st.uniform(-1, 1);
    Vector x0 = Vector::Zero(n);
    const Matrix y_win = lti::simulate(sys, x0, u_win);
    hankel::OnlineWindow window;
    window.u_ini = u_win.leftCols(Tp).reshaped();
    window.u_pred = u_win.rightCols(Tf).reshaped();
    window.y_ini = y_win.leftCols(Tp).reshaped();

    benchmark::DoNotOptimize(predictor::predict_raw(blocks, window));
    benchmark::DoNotOptimize(predictor::predict_tsvd(blocks, r, window));
    benchmark::DoNotOptimize(bounds::bound_raw(blocks, window, r, 1e-5, {}));
    benchmark::DoNotOptimize(bounds::bound_tsvd(blocks, r, window, 1e-5, {}));
    ++seed;
  }
}
BENCHMARK(bm_scenario_cell);

}  // namespace

BENCHMARK_MAIN();
