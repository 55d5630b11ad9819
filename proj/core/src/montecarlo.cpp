#include "ddpred/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <stdexcept>
#include <thread>

#include <Eigen/Dense>

#include "ddpred/hankel.hpp"
#include "ddpred/lti.hpp"
#include "ddpred/numerics.hpp"
#include "ddpred/predictor.hpp"
#include "ddpred/rng.hpp"

namespace ddpred::montecarlo {

namespace {

// Seed-path tags keeping system draws and noise draws on disjoint
// streams.
constexpr std::uint64_t kSystemTag = 1;
constexpr std::uint64_t kNoiseTag = 2;

Index max_past_horizon(const ExperimentConfig& cfg) {
  return cfg.tp_policy.kind == TpPolicy::Kind::force_n_over_p
             ? cfg.n_max
             : cfg.tp_policy.Tp_max;
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.num_systems < 1) {
    throw std::invalid_argument("num_systems must be positive");
  }
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) {
    throw std::invalid_argument("order range is empty");
  }
  if (cfg.Tf_min < 1 || cfg.Tf_max < cfg.Tf_min) {
    throw std::invalid_argument("future-horizon range is empty");
  }
  if (cfg.tp_policy.kind == TpPolicy::Kind::random_range &&
      (cfg.tp_policy.Tp_min < 1 || cfg.tp_policy.Tp_max < cfg.tp_policy.Tp_min)) {
    throw std::invalid_argument("past-horizon range is empty");
  }
  if (cfg.L < max_past_horizon(cfg) + cfg.Tf_max) {
    throw std::invalid_argument(
        "data length is shorter than the largest possible window");
  }
  if (cfg.noise_levels.empty()) {
    throw std::invalid_argument("at least one noise level is required");
  }
  double prev = 0.0;
  for (double level : cfg.noise_levels) {
    if (!(level > 0.0)) {
      throw std::invalid_argument("noise levels must be strictly positive");
    }
    if (!(level > prev)) {
      throw std::invalid_argument("noise levels must be strictly ascending");
    }
    prev = level;
  }
  if (cfg.realizations_per_level < 1) {
    throw std::invalid_argument("realizations_per_level must be positive");
  }
  if (cfg.retry_cap < 1) {
    throw std::invalid_argument("retry_cap must be positive");
  }
}

std::vector<double> log_spaced_levels(double lo, double hi, Index count) {
  if (!(lo > 0.0) || !(hi >= lo)) {
    throw std::invalid_argument("levels need 0 < lo <= hi");
  }
  if (count < 1) throw std::invalid_argument("count must be positive");
  if (count == 1) return {lo};
  if (!(hi > lo)) {
    throw std::invalid_argument("several levels need hi > lo");
  }
  std::vector<double> levels(static_cast<std::size_t>(count));
  const double llo = std::log10(lo);
  const double step = (std::log10(hi) - llo) / static_cast<double>(count - 1);
  for (Index i = 0; i < count; ++i) {
    levels[static_cast<std::size_t>(i)] =
        std::pow(10.0, llo + step * static_cast<double>(i));
  }
  return levels;
}

namespace {

struct Counters {
  Index systems_resampled = 0;
  Index lag_conflicts = 0;
  Index noise_resamples = 0;
};

struct PreparedSystem {
  Index n = 0, m = 0, p = 0, Tp = 0, Tf = 0, r = 0;
  lti::StateSpace sys;
  Matrix u_d;  // offline input, m x L
  Matrix y_d;  // clean offline output, p x L
  hankel::OnlineWindow window;  // clean online data
  Vector y_pred_clean;
  double norm_ypred = 0.0;
};

Vector flatten(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

Matrix random_uniform(Index rows, Index cols, rng::Stream& st) {
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) a(i, j) = st.uniform(-1.0, 1.0);
  }
  return a;
}

// One attempted system draw; empty on any rejection (policy mismatch,
// unobservable, lag conflict, failed rank condition).
std::optional<PreparedSystem> prepare_attempt(const ExperimentConfig& cfg,
                                              Index system_id, Index attempt,
                                              Counters& counters) {
  rng::Stream st(
      rng::derive(cfg.master_seed,
                  {kSystemTag, static_cast<std::uint64_t>(system_id),
                   static_cast<std::uint64_t>(attempt)}));
  PreparedSystem ps;
  ps.n = st.uniform_int(static_cast<int>(cfg.n_min),
                        static_cast<int>(cfg.n_max));
  ps.m = st.uniform_int(1, static_cast<int>(ps.n));
  ps.p = st.uniform_int(1, static_cast<int>(ps.n));
  ps.Tf = st.uniform_int(static_cast<int>(cfg.Tf_min),
                         static_cast<int>(cfg.Tf_max));
  if (cfg.tp_policy.kind == TpPolicy::Kind::force_n_over_p) {
    if (ps.n % ps.p != 0) return std::nullopt;
    ps.Tp = ps.n / ps.p;
  } else {
    ps.Tp = st.uniform_int(static_cast<int>(cfg.tp_policy.Tp_min),
                           static_cast<int>(cfg.tp_policy.Tp_max));
  }
  const Index T = ps.Tp + ps.Tf;
  ps.r = ps.m * T + ps.n;

  try {
    ps.sys = lti::random_stable_system(ps.n, ps.m, ps.p, st.raw());
  } catch (const GenerationError&) {
    return std::nullopt;
  }
  // The past window must pin down the latent initial state.
  if (ps.Tp < lti::lag(ps.sys)) {
    ++counters.lag_conflicts;
    return std::nullopt;
  }

  ps.u_d = random_uniform(ps.m, cfg.L, st);
  ps.y_d = lti::simulate(ps.sys, Vector::Zero(ps.n), ps.u_d);
  const auto blocks = hankel::make_blocks({ps.u_d, ps.y_d}, ps.Tp, ps.Tf, ps.n);
  if (!hankel::check_persistency(blocks.stacked(), ps.m, T, ps.n)) {
    return std::nullopt;
  }

  ps.window.u_ini = flatten(random_uniform(ps.m, ps.Tp, st));
  ps.window.u_pred = flatten(random_uniform(ps.m, ps.Tf, st));
  const Vector x_ini = flatten(random_uniform(ps.n, 1, st));
  const Matrix u_ini_mat =
      Eigen::Map<const Matrix>(ps.window.u_ini.data(), ps.m, ps.Tp);
  ps.window.y_ini = flatten(lti::simulate(ps.sys, x_ini, u_ini_mat));

  ps.y_pred_clean = predictor::predict_raw(blocks, ps.window).y_pred;
  ps.norm_ypred = ps.y_pred_clean.norm();
  return ps;
}

bool margin_passes(const std::optional<double>& margin, double threshold) {
  return margin.has_value() && *margin > threshold;
}

// Worst-case change of the signal-to-noise margin between two noise
// realizations at the same level; if the threshold deficit exceeds it,
// further redraws are provably futile.
double margin_swing(const bounds::Dims& d, double N, bool tsvd) {
  const double offline = bounds::offline_radical(d, bounds::NoiseSetting::output_error);
  if (!tsvd) return 2.0 * offline * N;
  // Truncation can amplify the perturbation; bound the r-th singular
  // value's travel through the truncation-error estimate, all output
  // rows counted.
  const double full = std::sqrt(static_cast<double>(d.p * d.T() * d.M)) * N;
  return 2.0 * (3.0 + 2.0 * (1.0 + std::sqrt(2.0))) * full;
}

std::optional<ScenarioRecord> run_cell(const ExperimentConfig& cfg,
                                       const PreparedSystem& ps,
                                       Index system_id, Index attempt,
                                       Index level_idx, Index realization,
                                       Counters& counters) {
  const double N = cfg.noise_levels[static_cast<std::size_t>(level_idx)];
  const bounds::Dims dims{ps.m, ps.p, ps.Tp, ps.Tf,
                          cfg.L - (ps.Tp + ps.Tf) + 1};
  const bool gate_raw = cfg.delta_sn_target != DeltaSnTarget::tsvd;
  const bool gate_tsvd = cfg.delta_sn_target != DeltaSnTarget::raw;

  for (int t = 0; t <= cfg.retry_cap; ++t) {
    const auto noise_path = [&](std::uint64_t k) {
      return rng::derive(cfg.master_seed,
                         {kNoiseTag, static_cast<std::uint64_t>(system_id),
                          static_cast<std::uint64_t>(attempt),
                          static_cast<std::uint64_t>(level_idx),
                          static_cast<std::uint64_t>(realization),
                          static_cast<std::uint64_t>(t), k});
    };
    const Matrix y_noisy = hankel::corrupt_output(ps.y_d, N, noise_path(0));
    hankel::OnlineWindow window = ps.window;
    window.y_ini = hankel::corrupt_output(window.y_ini, N, noise_path(1));

    const auto blocks =
        hankel::make_blocks({ps.u_d, y_noisy}, ps.Tp, ps.Tf, ps.n);
    const Vector h = window.stacked();
    const Matrix h1 = blocks.h1();
    const auto f1 = numerics::svd(h1);
    const auto trunc = predictor::truncate_blocks(blocks, ps.r);
    const Matrix h1_hat = trunc.h1();
    const auto f2 = numerics::svd(h1_hat);

    const auto rep1 = bounds::bound_raw_from_norms(
        bounds::raw_inputs_from_factors(f1, ps.r, blocks.Yf, h), dims, N,
        {bounds::Predictor::raw, bounds::NoiseSetting::output_error, {}});
    const auto rep2 = bounds::bound_tsvd_from_norms(
        bounds::tsvd_inputs_from_factors(f2, ps.r, h1_hat, h1, trunc.Yf,
                                         blocks.Yf, h),
        dims, N,
        {bounds::Predictor::tsvd, bounds::NoiseSetting::output_error, {}});

    if (cfg.delta_sn_threshold) {
      const double thr = *cfg.delta_sn_threshold;
      const bool ok = (!gate_raw || margin_passes(rep1.delta_sn, thr)) &&
                      (!gate_tsvd || margin_passes(rep2.delta_sn, thr));
      if (!ok) {
        ++counters.noise_resamples;
        const auto hopeless = [&](const std::optional<double>& margin,
                                  bool tsvd) {
          return !margin || thr - *margin > margin_swing(dims, N, tsvd);
        };
        if ((gate_raw && !margin_passes(rep1.delta_sn, thr) &&
             hopeless(rep1.delta_sn, false)) ||
            (gate_tsvd && !margin_passes(rep2.delta_sn, thr) &&
             hopeless(rep2.delta_sn, true))) {
          return std::nullopt;  // no realization at this level can pass
        }
        continue;
      }
    }

    ScenarioRecord rec;
    rec.system_id = system_id;
    rec.n = ps.n;
    rec.m = ps.m;
    rec.p = ps.p;
    rec.Tp = ps.Tp;
    rec.Tf = ps.Tf;
    rec.N = N;
    rec.realization = realization;
    const Vector y_raw = blocks.Yf * numerics::apply_pinv(f1, h);
    const Vector y_tsvd = trunc.Yf * numerics::apply_pinv(f2, h);
    rec.err_raw = (y_raw - ps.y_pred_clean).norm();
    rec.err_tsvd = (y_tsvd - ps.y_pred_clean).norm();
    rec.norm_ypred = ps.norm_ypred;
    rec.bound1 = rep1.total;
    rec.bound2 = rep2.total;
    rec.delta_sn_raw = rep1.delta_sn;
    rec.delta_sn_tsvd = rep2.delta_sn;
    if (rep1.total && rec.norm_ypred > 0.0) {
      rec.relgap1 = relative_gap(*rep1.total, rec.err_raw, rec.norm_ypred);
    }
    if (rep2.total && rec.norm_ypred > 0.0) {
      rec.relgap2 = relative_gap(*rep2.total, rec.err_tsvd, rec.norm_ypred);
    }
    rec.tsvd_improved = rec.err_tsvd < rec.err_raw;
    return rec;
  }
  return std::nullopt;
}

struct SystemResult {
  std::vector<ScenarioRecord> records;
  Counters counters;
  std::vector<std::string> skipped;
};

std::string cell_name(Index system_id, Index level_idx, Index realization) {
  return "system " + std::to_string(system_id) + " level " +
         std::to_string(level_idx) + " realization " +
         std::to_string(realization);
}

SystemResult run_system(const ExperimentConfig& cfg, Index system_id) {
  SystemResult result;
  const Index levels = static_cast<Index>(cfg.noise_levels.size());

  for (Index attempt = 0;; ++attempt) {
    const bool last = attempt >= cfg.retry_cap;
    const auto ps =
        prepare_attempt(cfg, system_id, attempt, result.counters);
    if (!ps) {
      if (last) {
        for (Index i = 0; i < levels; ++i) {
          for (Index j = 0; j < cfg.realizations_per_level; ++j) {
            result.skipped.push_back(cell_name(system_id, i, j) +
                                     ": system generation retries exhausted");
          }
        }
        return result;
      }
      ++result.counters.systems_resampled;
      continue;
    }

    result.records.clear();
    std::vector<std::string> failed;
    for (Index i = 0; i < levels && (failed.empty() || last); ++i) {
      for (Index j = 0;
           j < cfg.realizations_per_level && (failed.empty() || last); ++j) {
        auto rec = run_cell(cfg, *ps, system_id, attempt, i, j,
                            result.counters);
        if (rec) {
          result.records.push_back(std::move(*rec));
        } else {
          failed.push_back(cell_name(system_id, i, j) +
                           ": noise retries exhausted by the margin threshold");
        }
      }
    }
    if (failed.empty() || last) {
      result.skipped = std::move(failed);
      return result;
    }
    ++result.counters.systems_resampled;  // redraw the system, rerun all cells
  }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, int jobs) {
  validate(cfg);
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");

  std::vector<SystemResult> results(
      static_cast<std::size_t>(cfg.num_systems));
  const int workers = static_cast<int>(
      std::min<Index>(jobs, cfg.num_systems));
  if (workers <= 1) {
    for (Index s = 0; s < cfg.num_systems; ++s) {
      results[static_cast<std::size_t>(s)] = run_system(cfg, s);
    }
  } else {
    std::atomic<Index> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (Index s = next.fetch_add(1); s < cfg.num_systems;
             s = next.fetch_add(1)) {
          results[static_cast<std::size_t>(s)] = run_system(cfg, s);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  RunReport report;
  for (auto& res : results) {
    report.records.insert(report.records.end(),
                          std::make_move_iterator(res.records.begin()),
                          std::make_move_iterator(res.records.end()));
    report.systems_resampled += res.counters.systems_resampled;
    report.lag_conflicts += res.counters.lag_conflicts;
    report.noise_resamples += res.counters.noise_resamples;
    report.skipped_cells.insert(report.skipped_cells.end(),
                                std::make_move_iterator(res.skipped.begin()),
                                std::make_move_iterator(res.skipped.end()));
  }
  return report;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) {
    throw std::invalid_argument("quantile of an empty sample");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("quantile level must lie in [0, 1]");
  }
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

BoxStats box_stats(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  BoxStats box;
  box.median = quantile_sorted(values, 0.5);
  box.q1 = quantile_sorted(values, 0.25);
  box.q3 = quantile_sorted(values, 0.75);
  const double iqr = box.q3 - box.q1;
  const double lo_fence = box.q1 - 1.5 * iqr;
  const double hi_fence = box.q3 + 1.5 * iqr;
  box.lo_whisker = box.q1;
  box.hi_whisker = box.q3;
  for (double v : values) {
    if (v >= lo_fence) {
      box.lo_whisker = v;
      break;
    }
  }
  for (auto it = values.rbegin(); it != values.rend(); ++it) {
    if (*it <= hi_fence) {
      box.hi_whisker = *it;
      break;
    }
  }
  for (double v : values) {
    if (v < lo_fence || v > hi_fence) ++box.outlier_count;
  }
  return box;
}

}  // namespace

AggregateStats summarize(const std::vector<ScenarioRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("cannot summarize an empty record set");
  }
  std::map<double, std::vector<const ScenarioRecord*>> by_level;
  for (const auto& rec : records) by_level[rec.N].push_back(&rec);

  AggregateStats stats;
  Index improved = 0;
  for (const auto& rec : records) {
    if (rec.tsvd_improved) ++improved;
  }
  stats.tsvd_improved_fraction =
      static_cast<double>(improved) / static_cast<double>(records.size());

  std::vector<std::pair<double, double>> pts1, pts2;
  for (const auto& [N, recs] : by_level) {
    LevelStats level;
    level.N = N;
    level.count = static_cast<Index>(recs.size());
    double sum1 = 0.0, sum2 = 0.0;
    std::vector<double> gaps1, gaps2;
    for (const auto* rec : recs) {
      if (rec->bound1) {
        ++level.applicable1;
        sum1 += *rec->bound1;
      }
      if (rec->bound2) {
        ++level.applicable2;
        sum2 += *rec->bound2;
      }
      if (rec->relgap1) gaps1.push_back(*rec->relgap1);
      if (rec->relgap2) gaps2.push_back(*rec->relgap2);
    }
    if (level.applicable1 > 0) {
      level.mean_bound1 = sum1 / static_cast<double>(level.applicable1);
    }
    if (level.applicable2 > 0) {
      level.mean_bound2 = sum2 / static_cast<double>(level.applicable2);
    }
    if (!gaps1.empty()) {
      level.max_relgap1 = *std::max_element(gaps1.begin(), gaps1.end());
      level.relgap1_box = box_stats(gaps1);
      level.median_relgap1 = level.relgap1_box->median;
    }
    if (!gaps2.empty()) {
      level.max_relgap2 = *std::max_element(gaps2.begin(), gaps2.end());
      level.relgap2_box = box_stats(gaps2);
      level.median_relgap2 = level.relgap2_box->median;
    }
    if (level.mean_bound1 && *level.mean_bound1 > 0.0) {
      pts1.emplace_back(N, *level.mean_bound1);
    }
    if (level.mean_bound2 && *level.mean_bound2 > 0.0) {
      pts2.emplace_back(N, *level.mean_bound2);
    }
    stats.levels.push_back(std::move(level));
  }
  if (pts1.size() >= 2) stats.slope_bound1 = fit_loglog_slope(pts1);
  if (pts2.size() >= 2) stats.slope_bound2 = fit_loglog_slope(pts2);
  return stats;
}

double fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) {
    throw std::domain_error("slope fit needs at least two points");
  }
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::domain_error("slope fit needs positive coordinates");
    }
    mx += std::log10(x);
    my += std::log10(y);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log10(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log10(y) - my);
  }
  if (sxx == 0.0) {
    throw std::domain_error("slope fit needs distinct noise levels");
  }
  return sxy / sxx;
}

}  // namespace ddpred::montecarlo
