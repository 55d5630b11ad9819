#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddpred/bounds.hpp"
#include "ddpred/types.hpp"

namespace ddpred::montecarlo {

/// How the past horizon is chosen per system.
struct TpPolicy {
  enum class Kind { random_range, force_n_over_p };
  Kind kind = Kind::random_range;
  Index Tp_min = 1;  // used by random_range
  Index Tp_max = 3;
};

/// Which margin(s) the rejection threshold applies to.
enum class DeltaSnTarget { raw, tsvd, both };

struct ExperimentConfig {
  Index num_systems = 1000;
  Index n_min = 1;
  Index n_max = 2;
  Index Tf_min = 1;
  Index Tf_max = 3;
  Index L = 100;
  std::vector<double> noise_levels;  // strictly positive, ascending
  Index realizations_per_level = 100;
  TpPolicy tp_policy;
  std::optional<double> delta_sn_threshold;
  DeltaSnTarget delta_sn_target = DeltaSnTarget::both;
  std::uint64_t master_seed = 0;
  int retry_cap = 100;
};

/// Throws std::invalid_argument on violated invariants.
void validate(const ExperimentConfig& cfg);

/// Noise levels logarithmically spaced over [lo, hi], inclusive.
std::vector<double> log_spaced_levels(double lo, double hi, Index count);

/// One executed noise scenario. Optional fields are absent when the
/// corresponding bound is inapplicable (or, for the margins, when the
/// r-th singular value does not exist).
struct ScenarioRecord {
  Index system_id = 0;
  Index n = 0, m = 0, p = 0, Tp = 0, Tf = 0;
  double N = 0.0;
  Index realization = 0;
  double err_raw = 0.0;
  double err_tsvd = 0.0;
  double norm_ypred = 0.0;
  std::optional<double> bound1;  // raw-predictor bound total
  std::optional<double> bound2;  // truncated-predictor bound total
  std::optional<double> delta_sn_raw;
  std::optional<double> delta_sn_tsvd;
  std::optional<double> relgap1;
  std::optional<double> relgap2;
  bool tsvd_improved = false;
};

/// Run output: records plus rejection accounting. `skipped_cells` is
/// nonempty only when a retry budget was exhausted; records for skipped
/// cells are absent.
struct RunReport {
  std::vector<ScenarioRecord> records;
  Index systems_resampled = 0;  // draws rejected before any cell ran
  Index lag_conflicts = 0;      // past horizon shorter than the lag
  Index noise_resamples = 0;    // realizations rejected by the threshold
  std::vector<std::string> skipped_cells;

  bool complete() const { return skipped_cells.empty(); }
};

/// Executes the full grid. Deterministic in cfg.master_seed for every
/// value of `jobs`; cells are seeded by their grid position, not by
/// execution order.
RunReport run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Five-number box summary with 1.5 IQR whiskers.
struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double lo_whisker = 0.0;
  double hi_whisker = 0.0;
  Index outlier_count = 0;
};

struct LevelStats {
  double N = 0.0;
  Index count = 0;        // records at this level
  Index applicable1 = 0;  // raw bound applicable
  Index applicable2 = 0;  // truncated bound applicable
  std::optional<double> mean_bound1;  // over applicable records
  std::optional<double> mean_bound2;
  std::optional<double> max_relgap1;
  std::optional<double> max_relgap2;
  std::optional<double> median_relgap1;
  std::optional<double> median_relgap2;
  std::optional<BoxStats> relgap1_box;
  std::optional<BoxStats> relgap2_box;
};

struct AggregateStats {
  std::vector<LevelStats> levels;  // ascending in N
  double tsvd_improved_fraction = 0.0;
  std::optional<double> slope_bound1;  // log-log fit of mean bound vs N
  std::optional<double> slope_bound2;
};

/// Deterministic fold over the records (sorted by grid position).
/// Throws std::invalid_argument on an empty record set.
AggregateStats summarize(const std::vector<ScenarioRecord>& records);

/// Ordinary least-squares slope of log10(value) against log10(N).
/// Throws std::domain_error on fewer than two points or nonpositive
/// coordinates.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Linear-interpolation quantile (the common "type 7" rule) of a sorted
/// sample; q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

using bounds::relative_gap;

}  // namespace ddpred::montecarlo
