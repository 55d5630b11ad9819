// ddpred: command-line front end for the prediction library.
//
// Subcommands: simulate, predict, bound, montecarlo, summarize.
// Exit codes: 0 success (an inapplicable bound is still a success),
// 1 usage error, 2 data error, 3 numerical failure.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "ddpred/bounds.hpp"
#include "ddpred/hankel.hpp"
#include "ddpred/io.hpp"
#include "ddpred/lti.hpp"
#include "ddpred/montecarlo.hpp"
#include "ddpred/predictor.hpp"
#include "ddpred/rng.hpp"
#include "ddpred/types.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ddpred;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("DDPRED_SEED")) {
    std::uint64_t value = 0;
    const std::string text(env);
    const auto res =
        std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
      throw UsageError("DDPRED_SEED is not an unsigned integer");
    }
    return value;
  }
  throw UsageError("a seed is required: pass --seed or set DDPRED_SEED");
}

std::string utc_now() {
  const auto t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("cannot initialize SHA-256");
  }
  char buf[8192];
  while (in.good()) {
    in.read(buf, sizeof buf);
    const auto got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx, buf, static_cast<size_t>(got)) != 1) {
      EVP_MD_CTX_free(ctx);
      throw std::runtime_error("SHA-256 update failed");
    }
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 finalize failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

std::string sidecar_path(const std::string& out) {
  fs::path p(out);
  if (p.extension() == ".csv") p.replace_extension();
  return p.string() + ".system.csv";
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Index order = 1;
  Index inputs = 1;
  Index outputs = 1;
  Index length = 100;
  std::optional<std::uint64_t> seed;
  double noise = 0.0;
  std::string out;
};

int cmd_simulate(const SimulateArgs& args) {
  if (args.order < 1 || args.inputs < 1 || args.outputs < 1 ||
      args.length < 1) {
    throw UsageError("dimensions and length must be positive");
  }
  if (args.noise < 0.0) throw UsageError("--noise must be nonnegative");
  const std::uint64_t seed = resolve_seed(args.seed);

  const auto sys = lti::random_stable_system(args.order, args.inputs,
                                             args.outputs,
                                             rng::derive(seed, {0}));
  rng::Stream input_stream(rng::derive(seed, {1}));
  Matrix u(args.inputs, args.length);
  for (Index j = 0; j < u.cols(); ++j) {
    for (Index i = 0; i < u.rows(); ++i) u(i, j) = input_stream.uniform(-1, 1);
  }
  lti::Trajectory traj;
  traj.u = u;
  traj.y = lti::simulate(sys, Vector::Zero(args.order), u);
  if (args.noise > 0.0) {
    traj.y = hankel::corrupt_output(traj.y, args.noise, rng::derive(seed, {2}));
  }
  io::write_trajectory_csv(args.out, traj);
  io::write_system_csv(sidecar_path(args.out), sys);
  return kExitOk;
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
  std::string data;
  std::string online;
  Index T = 0;  // 0 = derive from horizons
  Index Tp = 0;
  Index Tf = 0;
  std::string method = "raw";
  std::optional<Index> order;
  std::string out;
  std::string emit_g;
};

hankel::HankelBlocks load_blocks(const std::string& data_path, Index Tp,
                                 Index Tf, Index n) {
  const auto traj = io::read_trajectory_csv(data_path);
  try {
    return hankel::make_blocks(traj, Tp, Tf, n);
  } catch (const std::invalid_argument& err) {
    throw DataError(data_path + ": " + err.what());
  }
}

hankel::OnlineWindow load_online(const std::string& path,
                                 const hankel::HankelConfig& cfg) {
  const auto win = io::read_online_csv(path);
  if (win.u_ini.size() != cfg.m * cfg.Tp ||
      win.u_pred.size() != cfg.m * cfg.Tf ||
      win.y_ini.size() != cfg.p * cfg.Tp) {
    throw DataError(path + ": online window does not match --Tp/--Tf and the "
                           "trajectory dimensions");
  }
  return win;
}

void check_horizons(Index T, Index Tp, Index Tf) {
  if (Tp < 1 || Tf < 1) {
    throw UsageError("--Tp and --Tf must be at least 1");
  }
  if (T != 0 && T != Tp + Tf) {
    throw UsageError("--T must equal --Tp plus --Tf");
  }
}

int cmd_predict(const PredictArgs& args) {
  check_horizons(args.T, args.Tp, args.Tf);
  if (args.method != "raw" && args.method != "tsvd") {
    throw UsageError("--method must be raw or tsvd");
  }
  if (args.method == "tsvd" && !args.order) {
    throw UsageError("--method tsvd requires --order");
  }
  if (args.order && *args.order < 1) {
    throw UsageError("--order must be positive");
  }
  const auto blocks = load_blocks(args.data, args.Tp, args.Tf,
                                  args.order.value_or(0));
  const auto online = load_online(args.online, blocks.config);

  predictor::PredictionResult result;
  if (args.method == "raw") {
    result = predictor::predict_raw(blocks, online);
  } else {
    const Index r = blocks.config.r();
    try {
      result = predictor::predict_tsvd(blocks, r, online);
    } catch (const std::invalid_argument& err) {
      throw DataError(std::string("truncation rank out of range: ") +
                      err.what());
    }
  }
  if (result.excitation_warning) {
    std::cerr << "warning: offline input is not persistently exciting "
                 "(rank-deficient data matrix)\n";
  }
  io::write_vector_csv(args.out, result.y_pred, "y_pred");
  if (!args.emit_g.empty()) {
    io::write_vector_csv(args.emit_g, result.g_star, "g");
  }
  return kExitOk;
}

// ------------------------------------------------------------------- bound

struct BoundArgs {
  std::string data;
  std::string online;
  Index T = 0;
  Index Tp = 0;
  Index Tf = 0;
  Index order = 0;
  double noise_level = -1.0;
  int theorem = 0;
  bool eiv = false;
  std::optional<double> oracle_sigma_r;
  bool linearized = false;
  bool terms = false;
  std::string out;
  std::string csv;
};

std::string opt_str(const std::optional<double>& v) {
  return v ? io::format_double(*v) : std::string();
}

int cmd_bound(const BoundArgs& args) {
  check_horizons(args.T, args.Tp, args.Tf);
  if (args.order < 1) throw UsageError("--order must be positive");
  if (args.noise_level < 0.0) {
    throw UsageError("--noise-level must be nonnegative");
  }
  if (args.theorem != 1 && args.theorem != 2) {
    throw UsageError("--theorem must be 1 or 2");
  }
  if (args.oracle_sigma_r && !(*args.oracle_sigma_r > 0.0)) {
    throw UsageError("--oracle-sigma-r must be positive");
  }

  const auto blocks = load_blocks(args.data, args.Tp, args.Tf, args.order);
  const auto online = load_online(args.online, blocks.config);
  const Index r = blocks.config.r();

  bounds::BoundVariant variant;
  variant.predictor =
      args.theorem == 1 ? bounds::Predictor::raw : bounds::Predictor::tsvd;
  variant.noise = args.eiv ? bounds::NoiseSetting::errors_in_variables
                           : bounds::NoiseSetting::output_error;
  variant.oracle_sigma_r = args.oracle_sigma_r;

  bounds::BoundReport report;
  std::optional<double> linearized;
  try {
    if (args.theorem == 1) {
      report = bounds::bound_raw(blocks, online, r, args.noise_level, variant);
      if (args.linearized) {
        linearized = bounds::linearized_bound_raw(blocks, online, r,
                                                  args.noise_level, variant);
      }
    } else {
      report =
          bounds::bound_tsvd(blocks, r, online, args.noise_level, variant);
      if (args.linearized) {
        linearized = bounds::linearized_bound_tsvd(blocks, online, r,
                                                   args.noise_level, variant);
      }
    }
  } catch (const std::invalid_argument& err) {
    throw DataError(err.what());
  }

  std::ostringstream text;
  text << "theorem=" << args.theorem << '\n'
       << "noise_setting=" << (args.eiv ? "errors_in_variables" : "output_error")
       << '\n'
       << "oracle_sigma_r=" << opt_str(args.oracle_sigma_r) << '\n'
       << "applicable=" << (report.applicable ? "true" : "false") << '\n'
       << "delta_sn=" << opt_str(report.delta_sn) << '\n'
       << "sigma_sq=" << opt_str(report.sigma_sq) << '\n';
  if (args.terms) {
    text << "term_perturbation=" << io::format_double(report.term_perturbation)
         << '\n'
         << "term_online_noise=" << io::format_double(report.term_online_noise)
         << '\n'
         << "term_offset=" << io::format_double(report.term_offset) << '\n';
  }
  text << "total=" << opt_str(report.total) << '\n';
  if (args.linearized) text << "linearized=" << opt_str(linearized) << '\n';

  if (args.out.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream out(args.out);
    if (!out.is_open()) {
      throw std::runtime_error("cannot open for writing: " + args.out);
    }
    out << text.str();
  }
  if (!args.csv.empty()) {
    std::ofstream out(args.csv);
    if (!out.is_open()) {
      throw std::runtime_error("cannot open for writing: " + args.csv);
    }
    out << "theorem,noise_setting,oracle_sigma_r,applicable,delta_sn,sigma_sq,"
           "term_perturbation,term_online_noise,term_offset,total,linearized\n"
        << args.theorem << ','
        << (args.eiv ? "errors_in_variables" : "output_error") << ','
        << opt_str(args.oracle_sigma_r) << ','
        << (report.applicable ? 1 : 0) << ',' << opt_str(report.delta_sn)
        << ',' << opt_str(report.sigma_sq) << ','
        << io::format_double(report.term_perturbation) << ','
        << io::format_double(report.term_online_noise) << ','
        << io::format_double(report.term_offset) << ','
        << opt_str(report.total) << ',' << opt_str(linearized) << '\n';
  }
  return kExitOk;
}

// -------------------------------------------------------------- montecarlo

struct MonteCarloArgs {
  std::string config;
  std::string out_dir;
  double scale = 1.0;
  int jobs = 1;
};

Index scaled_count(Index value, double scale) {
  const auto scaled =
      static_cast<Index>(std::llround(static_cast<double>(value) * scale));
  return std::max<Index>(1, scaled);
}

json require_key(const json& j, const std::string& key,
                 const std::string& path) {
  if (!j.contains(key)) {
    throw DataError(path + ": missing required key '" + key + "'");
  }
  return j.at(key);
}

montecarlo::ExperimentConfig parse_config(const std::string& path,
                                          double scale) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& err) {
    throw DataError(path + ": " + err.what());
  }
  if (!j.is_object()) throw DataError(path + ": config must be a JSON object");

  static const std::vector<std::string> known = {
      "num_systems",    "n_min",       "n_max",
      "Tf_min",         "Tf_max",      "L",
      "noise_levels",   "noise_min",   "noise_max",
      "noise_count",    "realizations_per_level",
      "Tp_policy",      "Tp_min",      "Tp_max",
      "delta_sn_threshold", "delta_sn_target",
      "master_seed",    "retry_cap"};
  for (const auto& item : j.items()) {
    if (std::find(known.begin(), known.end(), item.key()) == known.end()) {
      throw DataError(path + ": unknown config key '" + item.key() + "'");
    }
  }

  montecarlo::ExperimentConfig cfg;
  try {
    cfg.master_seed = require_key(j, "master_seed", path).get<std::uint64_t>();
    if (j.contains("num_systems")) cfg.num_systems = j.at("num_systems").get<Index>();
    if (j.contains("n_min")) cfg.n_min = j.at("n_min").get<Index>();
    if (j.contains("n_max")) cfg.n_max = j.at("n_max").get<Index>();
    if (j.contains("Tf_min")) cfg.Tf_min = j.at("Tf_min").get<Index>();
    if (j.contains("Tf_max")) cfg.Tf_max = j.at("Tf_max").get<Index>();
    if (j.contains("L")) cfg.L = j.at("L").get<Index>();
    if (j.contains("realizations_per_level")) {
      cfg.realizations_per_level = j.at("realizations_per_level").get<Index>();
    }
    if (j.contains("retry_cap")) cfg.retry_cap = j.at("retry_cap").get<int>();

    const bool has_list = j.contains("noise_levels");
    const bool has_span = j.contains("noise_min") || j.contains("noise_max") ||
                          j.contains("noise_count");
    if (has_list == has_span) {
      throw DataError(path + ": provide either noise_levels or the "
                             "noise_min/noise_max/noise_count trio");
    }
    if (has_list) {
      cfg.noise_levels = j.at("noise_levels").get<std::vector<double>>();
    } else {
      cfg.noise_levels = montecarlo::log_spaced_levels(
          require_key(j, "noise_min", path).get<double>(),
          require_key(j, "noise_max", path).get<double>(),
          require_key(j, "noise_count", path).get<Index>());
    }

    const std::string policy =
        j.contains("Tp_policy") ? j.at("Tp_policy").get<std::string>()
                                : std::string("random");
    if (policy == "random") {
      cfg.tp_policy.kind = montecarlo::TpPolicy::Kind::random_range;
      if (j.contains("Tp_min")) cfg.tp_policy.Tp_min = j.at("Tp_min").get<Index>();
      if (j.contains("Tp_max")) cfg.tp_policy.Tp_max = j.at("Tp_max").get<Index>();
    } else if (policy == "force_n_over_p") {
      cfg.tp_policy.kind = montecarlo::TpPolicy::Kind::force_n_over_p;
      if (j.contains("Tp_min") || j.contains("Tp_max")) {
        throw DataError(path +
                        ": Tp_min/Tp_max are only valid with Tp_policy=random");
      }
    } else {
      throw DataError(path + ": Tp_policy must be random or force_n_over_p");
    }

    if (j.contains("delta_sn_threshold")) {
      cfg.delta_sn_threshold = j.at("delta_sn_threshold").get<double>();
    }
    const std::string target =
        j.contains("delta_sn_target") ? j.at("delta_sn_target").get<std::string>()
                                      : std::string("both");
    if (target == "raw") {
      cfg.delta_sn_target = montecarlo::DeltaSnTarget::raw;
    } else if (target == "tsvd") {
      cfg.delta_sn_target = montecarlo::DeltaSnTarget::tsvd;
    } else if (target == "both") {
      cfg.delta_sn_target = montecarlo::DeltaSnTarget::both;
    } else {
      throw DataError(path + ": delta_sn_target must be raw, tsvd, or both");
    }
  } catch (const json::exception& err) {
    throw DataError(path + ": " + err.what());
  }

  cfg.num_systems = scaled_count(cfg.num_systems, scale);
  cfg.realizations_per_level = scaled_count(cfg.realizations_per_level, scale);
  try {
    montecarlo::validate(cfg);
  } catch (const std::invalid_argument& err) {
    throw DataError(path + ": " + err.what());
  }
  return cfg;
}

json config_to_json(const montecarlo::ExperimentConfig& cfg) {
  json j;
  j["num_systems"] = cfg.num_systems;
  j["n_min"] = cfg.n_min;
  j["n_max"] = cfg.n_max;
  j["Tf_min"] = cfg.Tf_min;
  j["Tf_max"] = cfg.Tf_max;
  j["L"] = cfg.L;
  j["noise_levels"] = cfg.noise_levels;
  j["realizations_per_level"] = cfg.realizations_per_level;
  if (cfg.tp_policy.kind == montecarlo::TpPolicy::Kind::random_range) {
    j["Tp_policy"] = "random";
    j["Tp_min"] = cfg.tp_policy.Tp_min;
    j["Tp_max"] = cfg.tp_policy.Tp_max;
  } else {
    j["Tp_policy"] = "force_n_over_p";
  }
  if (cfg.delta_sn_threshold) {
    j["delta_sn_threshold"] = *cfg.delta_sn_threshold;
  } else {
    j["delta_sn_threshold"] = nullptr;
  }
  switch (cfg.delta_sn_target) {
    case montecarlo::DeltaSnTarget::raw: j["delta_sn_target"] = "raw"; break;
    case montecarlo::DeltaSnTarget::tsvd: j["delta_sn_target"] = "tsvd"; break;
    case montecarlo::DeltaSnTarget::both: j["delta_sn_target"] = "both"; break;
  }
  j["master_seed"] = cfg.master_seed;
  j["retry_cap"] = cfg.retry_cap;
  return j;
}

int cmd_montecarlo(const MonteCarloArgs& args) {
  if (!(args.scale > 0.0)) throw UsageError("--scale must be positive");
  if (args.jobs < 1) throw UsageError("--jobs must be positive");
  const auto cfg = parse_config(args.config, args.scale);

  fs::create_directories(args.out_dir);
  const auto report = montecarlo::run_experiment(cfg, args.jobs);

  const fs::path dir(args.out_dir);
  const std::string records_path = (dir / "records.csv").string();
  const std::string summary_path = (dir / "summary.csv").string();
  io::write_records_csv(records_path, report.records);
  if (!report.records.empty()) {
    io::write_summary_csv(summary_path, montecarlo::summarize(report.records));
  }

  json manifest;
  manifest["tool_version"] = kVersion;
  manifest["created_utc"] = utc_now();
  manifest["master_seed"] = cfg.master_seed;
  manifest["jobs"] = args.jobs;
  manifest["scale"] = args.scale;
  manifest["config_path"] = args.config;
  manifest["config_sha256"] = sha256_file(args.config);
  manifest["resolved_config"] = config_to_json(cfg);
  manifest["records"] = "records.csv";
  manifest["summary"] = report.records.empty() ? json() : json("summary.csv");
  manifest["record_count"] = report.records.size();
  manifest["systems_resampled"] = report.systems_resampled;
  manifest["lag_conflicts"] = report.lag_conflicts;
  manifest["noise_resamples"] = report.noise_resamples;
  manifest["skipped_cells"] = report.skipped_cells;
  std::ofstream mf(dir / "manifest.json");
  if (!mf.is_open()) {
    throw std::runtime_error("cannot open for writing: " +
                             (dir / "manifest.json").string());
  }
  mf << manifest.dump(2) << '\n';

  if (!report.complete()) {
    std::cerr << "warning: " << report.skipped_cells.size()
              << " cells skipped after exhausting retries (see manifest)\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// --------------------------------------------------------------- summarize

struct SummarizeArgs {
  std::string records;
  std::string out;
};

int cmd_summarize(const SummarizeArgs& args) {
  const auto records = io::read_records_csv(args.records);
  if (records.empty()) {
    throw DataError(args.records + ": no records to summarize");
  }
  io::write_summary_csv(args.out, montecarlo::summarize(records));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven output prediction with worst-case error bounds"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* sim_cmd =
      app.add_subcommand("simulate", "Generate a random stable system and "
                                     "record an input-output trajectory");
  sim_cmd->add_option("--order", sim.order, "State dimension")->required();
  sim_cmd->add_option("--inputs", sim.inputs, "Input count");
  sim_cmd->add_option("--outputs", sim.outputs, "Output count");
  sim_cmd->add_option("--length", sim.length, "Time steps to record");
  sim_cmd->add_option("--seed", sim.seed, "RNG seed (or DDPRED_SEED)");
  sim_cmd->add_option("--noise", sim.noise,
                      "Entrywise output-noise magnitude bound");
  sim_cmd->add_option("--out", sim.out, "Trajectory CSV path")->required();

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand(
      "predict", "Predict future outputs from recorded data");
  pred_cmd->add_option("--data", pred.data, "Trajectory CSV")->required();
  pred_cmd->add_option("--online", pred.online, "Online window CSV")
      ->required();
  pred_cmd->add_option("--T", pred.T, "Window length (Tp + Tf)");
  pred_cmd->add_option("--Tp", pred.Tp, "Past horizon")->required();
  pred_cmd->add_option("--Tf", pred.Tf, "Future horizon")->required();
  pred_cmd->add_option("--method", pred.method, "raw or tsvd");
  pred_cmd->add_option("--order", pred.order,
                       "Assumed state dimension (required for tsvd)");
  pred_cmd->add_option("--out", pred.out, "Prediction CSV path")->required();
  pred_cmd->add_option("--emit-g", pred.emit_g,
                       "Also write the coefficient vector");

  BoundArgs bnd;
  auto* bnd_cmd = app.add_subcommand(
      "bound", "Evaluate a worst-case prediction-error bound");
  bnd_cmd->add_option("--data", bnd.data, "Trajectory CSV")->required();
  bnd_cmd->add_option("--online", bnd.online, "Online window CSV")->required();
  bnd_cmd->add_option("--T", bnd.T, "Window length (Tp + Tf)");
  bnd_cmd->add_option("--Tp", bnd.Tp, "Past horizon")->required();
  bnd_cmd->add_option("--Tf", bnd.Tf, "Future horizon")->required();
  bnd_cmd->add_option("--order", bnd.order, "Assumed state dimension")
      ->required();
  bnd_cmd->add_option("--noise-level", bnd.noise_level,
                      "Entrywise noise magnitude bound")
      ->required();
  bnd_cmd->add_option("--theorem", bnd.theorem,
                      "1 = raw predictor, 2 = truncated predictor")
      ->required();
  bnd_cmd->add_flag("--eiv", bnd.eiv, "Assume noisy inputs as well");
  bnd_cmd->add_option("--oracle-sigma-r", bnd.oracle_sigma_r,
                      "Known clean r-th singular value");
  bnd_cmd->add_flag("--linearized", bnd.linearized,
                    "Also evaluate the small-noise linear form");
  bnd_cmd->add_flag("--terms", bnd.terms, "Report the three summands");
  bnd_cmd->add_option("--out", bnd.out, "Write the report here (else stdout)");
  bnd_cmd->add_option("--csv", bnd.csv, "Also write a one-row CSV");

  MonteCarloArgs mc;
  auto* mc_cmd = app.add_subcommand(
      "montecarlo", "Run a batch experiment from a JSON config");
  mc_cmd->add_option("--config", mc.config, "JSON config path")->required();
  mc_cmd->add_option("--out-dir", mc.out_dir, "Output directory")->required();
  mc_cmd->add_option("--scale", mc.scale,
                     "Multiply system and realization counts");
  mc_cmd->add_option("--jobs", mc.jobs, "Worker threads");

  SummarizeArgs sum;
  auto* sum_cmd =
      app.add_subcommand("summarize", "Aggregate a records CSV");
  sum_cmd->add_option("--records", sum.records, "Records CSV")->required();
  sum_cmd->add_option("--out", sum.out, "Summary CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (pred_cmd->parsed()) return cmd_predict(pred);
    if (bnd_cmd->parsed()) return cmd_bound(bnd);
    if (mc_cmd->parsed()) return cmd_montecarlo(mc);
    if (sum_cmd->parsed()) return cmd_summarize(sum);
    std::cerr << "error: no subcommand selected\n";
    return kExitUsage;
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const io::ParseError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  } catch (const DataError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  } catch (const NumericalError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const GenerationError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  } catch (const std::domain_error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  }
}
