#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "smctune/schedule_adapt.hpp"
#include "smctune/smc.hpp"

namespace smctune {

/// One fully-specified experiment: target, sampler, budget, replication
/// count. Replication i runs with seed = run.seed + i.
struct ExperimentSpec {
  std::string name = "experiment";

  std::string target_id = "shifted_gaussian";  // funnel | logreg_csv | logreg_synthetic
  int dim = 10;
  double shift = 3.0;
  std::string csv_path;
  int data_rows = 100;
  std::uint64_t data_seed = 1;

  KernelSpec kernel;
  PolicySpec policy;
  ScheduleKind schedule_kind = ScheduleKind::Quadratic;
  int num_steps = 64;  // T
  RunConfig run;
  int replications = 1;

  int rounds = 1;  // > 1 runs round-based schedule adaptation
  RoundPlan round_plan;
};

TargetModel make_target(const ExperimentSpec& spec);

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// Expands a named study preset into concrete specs; `overrides` is the same
/// flat key set accepted by spec_from_json plus preset-specific keys (dims,
/// grid_min, grid_max, grid_len, rho_grid). Throws on unknown preset names.
std::vector<ExperimentSpec> expand_preset(const std::string& name, nlohmann::json overrides);

struct ReplicationRecord {
  std::uint64_t seed = 0;
  double log_z_hat = 0.0;
  double wall_time_s = 0.0;
  long total_objective_evals = 0;
  bool failed = false;
  std::string error;
};

/// Aggregates over the successful replications. Quantiles use the
/// nearest-rank method (rank = ceil(p * n), 1-indexed).
struct SummaryRecord {
  std::vector<double> log_z_values;
  double median = 0.0;
  double quantile10 = 0.0;
  double quantile90 = 0.0;
  double mean_evals_per_step = 0.0;
};

double nearest_rank_quantile(std::vector<double> values, double p);

struct ExperimentOutput {
  SummaryRecord summary;
  std::vector<ReplicationRecord> replications;
  nlohmann::json diagnostics;
};

/// Runs the replications on a small worker pool (each worker owns one run
/// end-to-end) and aggregates deterministically. When out_dir is non-empty,
/// writes <out_dir>/<name>.csv and <out_dir>/<name>.json.
ExperimentOutput run_experiment(const ExperimentSpec& spec, const std::string& out_dir = "",
                                int max_workers = 0);

inline constexpr const char* kCsvHeader = "seed,log_z_hat,wall_time_s,total_objective_evals";

void write_replications_csv(const std::string& path, const std::vector<ReplicationRecord>& rows);
std::vector<ReplicationRecord> read_replications_csv(const std::string& path);

}  // namespace smctune
