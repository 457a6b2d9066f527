#include "smctune/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace smctune {

TargetModel make_target(const ExperimentSpec& spec) {
  if (spec.target_id == "shifted_gaussian") return make_shifted_gaussian(spec.dim, spec.shift);
  if (spec.target_id == "funnel") return make_funnel(spec.dim);
  if (spec.target_id == "logreg_csv") return load_logistic_regression_csv(spec.csv_path);
  if (spec.target_id == "logreg_synthetic")
    return make_synthetic_logistic_regression(spec.data_rows, spec.dim, spec.data_seed);
  throw std::invalid_argument("unknown target id: " + spec.target_id);
}

namespace {

ScheduleKind schedule_kind_from_string(const std::string& name) {
  if (name == "linear") return ScheduleKind::Linear;
  if (name == "quadratic") return ScheduleKind::Quadratic;
  throw std::invalid_argument("unknown schedule kind: " + name);
}

std::string to_string(ScheduleKind kind) {
  return kind == ScheduleKind::Linear ? "linear" : "quadratic";
}

}  // namespace

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  ExperimentSpec s;
  s.name = j.value("name", s.name);
  s.target_id = j.value("target", s.target_id);
  s.dim = j.value("dim", s.dim);
  s.shift = j.value("shift", s.shift);
  s.csv_path = j.value("csv", s.csv_path);
  s.data_rows = j.value("data_rows", s.data_rows);
  s.data_seed = j.value("data_seed", s.data_seed);

  s.kernel.kernel = kernel_type_from_string(j.value("kernel", std::string("lmc")));
  s.kernel.backward = backward_from_string(j.value("backward", std::string("tc_fwd")));
  s.policy.policy = adapt_policy_from_string(j.value("policy", std::string("fixed")));
  s.policy.fixed_h = j.value("fixed_h", s.policy.fixed_h);
  s.policy.fixed_rho = j.value("fixed_rho", s.policy.fixed_rho);
  if (j.contains("h_schedule")) s.policy.h_schedule = j["h_schedule"].get<std::vector<double>>();
  if (j.contains("rho_schedule"))
    s.policy.rho_schedule = j["rho_schedule"].get<std::vector<double>>();

  AdaptConfig acfg = s.kernel.kernel == KernelType::Klmc ? AdaptConfig::klmc_defaults()
                                                         : AdaptConfig::lmc_defaults();
  acfg.tau = j.value("tau", acfg.tau);
  acfg.epsilon = j.value("epsilon", acfg.epsilon);
  acfg.c = j.value("c", acfg.c);
  acfg.r = j.value("r", acfg.r);
  acfg.delta = j.value("delta", acfg.delta);
  acfg.h_guess = j.value("h_guess", acfg.h_guess);
  acfg.subsample = j.value("B", acfg.subsample);
  if (j.contains("xi")) acfg.xi = j["xi"].get<std::vector<double>>();
  acfg.rho_guess = j.value("rho_guess", acfg.rho_guess);
  s.policy.adapt = acfg;

  s.schedule_kind = schedule_kind_from_string(j.value("schedule", std::string("quadratic")));
  s.num_steps = j.value("T", s.num_steps);
  s.run.num_particles = j.value("N", s.run.num_particles);
  s.run.resample_threshold = j.value("resample_threshold", s.run.resample_threshold);
  s.run.scheme = resample_scheme_from_string(j.value("scheme", std::string("systematic")));
  s.run.seed = j.value("seed", s.run.seed);
  s.replications = j.value("replications", s.replications);

  s.rounds = j.value("rounds", s.rounds);
  s.round_plan.r_max = s.rounds;
  s.round_plan.t_initial = s.num_steps;
  s.round_plan.multiplier = j.value("round_multiplier", s.round_plan.multiplier);
  s.round_plan.t_max = j.value("t_max", s.round_plan.t_max);
  return s;
}

nlohmann::json spec_to_json(const ExperimentSpec& s) {
  nlohmann::json j{{"name", s.name},
                   {"target", s.target_id},
                   {"dim", s.dim},
                   {"kernel", to_string(s.kernel.kernel)},
                   {"backward", to_string(s.kernel.backward)},
                   {"policy", to_string(s.policy.policy)},
                   {"schedule", to_string(s.schedule_kind)},
                   {"T", s.num_steps},
                   {"N", s.run.num_particles},
                   {"resample_threshold", s.run.resample_threshold},
                   {"scheme", to_string(s.run.scheme)},
                   {"seed", s.run.seed},
                   {"replications", s.replications},
                   {"rounds", s.rounds}};
  if (s.target_id == "shifted_gaussian") j["shift"] = s.shift;
  if (s.target_id == "logreg_csv") j["csv"] = s.csv_path;
  if (s.target_id == "logreg_synthetic") {
    j["data_rows"] = s.data_rows;
    j["data_seed"] = s.data_seed;
  }
  if (s.policy.policy == AdaptPolicy::Fixed) {
    j["fixed_h"] = s.policy.fixed_h;
    if (s.kernel.kernel == KernelType::Klmc) j["fixed_rho"] = s.policy.fixed_rho;
    if (!s.policy.h_schedule.empty()) j["h_schedule"] = s.policy.h_schedule;
    if (!s.policy.rho_schedule.empty()) j["rho_schedule"] = s.policy.rho_schedule;
  } else {
    const AdaptConfig& a = s.policy.adapt;
    j["tau"] = a.tau;
    j["epsilon"] = a.epsilon;
    j["c"] = a.c;
    j["r"] = a.r;
    j["delta"] = a.delta;
    j["h_guess"] = a.h_guess;
    j["B"] = a.subsample;
    if (s.kernel.kernel == KernelType::Klmc) {
      j["xi"] = a.xi;
      j["rho_guess"] = a.rho_guess;
    }
  }
  return j;
}

namespace {

std::vector<int> parse_int_list(const nlohmann::json& v) {
  std::vector<int> out;
  if (v.is_array()) {
    for (const auto& e : v) out.push_back(e.get<int>());
  } else if (v.is_number()) {
    out.push_back(v.get<int>());
  } else {
    std::stringstream ss(v.get<std::string>());
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
  }
  return out;
}

nlohmann::json merged(nlohmann::json base, const nlohmann::json& overrides) {
  for (auto it = overrides.begin(); it != overrides.end(); ++it) base[it.key()] = it.value();
  return base;
}

}  // namespace

std::vector<ExperimentSpec> expand_preset(const std::string& name, nlohmann::json overrides) {
  std::vector<ExperimentSpec> specs;

  if (name == "adaptive") {
    nlohmann::json base{{"name", "adaptive"},         {"target", "funnel"},
                        {"dim", 10},                  {"kernel", "lmc"},
                        {"backward", "tc_fwd"},       {"policy", "adapt_kl"},
                        {"schedule", "quadratic"},    {"T", 64},
                        {"N", 1024},                  {"B", 128},
                        {"replications", 32}};
    specs.push_back(spec_from_json(merged(std::move(base), overrides)));
    return specs;
  }

  if (name == "gridsearch-fixed-h") {
    const double grid_min = overrides.value("grid_min", 1e-3);
    const double grid_max = overrides.value("grid_max", 1.0);
    const int grid_len = overrides.value("grid_len", 8);
    std::vector<double> rho_grid = {0.1, 0.5, 0.9};
    if (overrides.contains("rho_grid")) rho_grid = overrides["rho_grid"].get<std::vector<double>>();
    for (const char* k : {"grid_min", "grid_max", "grid_len", "rho_grid"}) overrides.erase(k);

    nlohmann::json base{{"target", "funnel"}, {"dim", 10},   {"kernel", "lmc"},
                        {"backward", "tc_fwd"}, {"policy", "fixed"}, {"schedule", "quadratic"},
                        {"T", 64},            {"N", 1024},   {"replications", 32}};
    base = merged(std::move(base), overrides);
    const bool klmc = base.value("kernel", "lmc") == std::string("klmc");
    for (int i = 0; i < grid_len; ++i) {
      const double frac = grid_len == 1 ? 0.0 : static_cast<double>(i) / (grid_len - 1);
      const double h = grid_min * std::pow(grid_max / grid_min, frac);
      nlohmann::json j = base;
      j["fixed_h"] = h;
      if (klmc) {
        for (std::size_t ri = 0; ri < rho_grid.size(); ++ri) {
          nlohmann::json jr = j;
          jr["fixed_rho"] = rho_grid[ri];
          jr["name"] = "gridsearch_h" + std::to_string(i) + "_rho" + std::to_string(ri);
          specs.push_back(spec_from_json(jr));
        }
      } else {
        j["name"] = "gridsearch_h" + std::to_string(i);
        specs.push_back(spec_from_json(j));
      }
    }
    return specs;
  }

  if (name == "backward-compare") {
    for (const std::string backward : {"dbf", "fwd", "tc_fwd"}) {
      nlohmann::json base{{"name", "backward_compare_" + backward},
                          {"target", "shifted_gaussian"},
                          {"dim", 10},
                          {"shift", 30.0},
                          {"kernel", "lmc"},
                          {"backward", backward},
                          {"policy", "fixed"},
                          {"fixed_h", 0.5},
                          {"schedule", "linear"},
                          {"T", 64},
                          {"N", 1024},
                          {"replications", 32}};
      specs.push_back(spec_from_json(merged(std::move(base), overrides)));
    }
    return specs;
  }

  if (name == "dim-scaling") {
    std::vector<int> dims = {16, 64};
    if (overrides.contains("dims")) dims = parse_int_list(overrides["dims"]);
    overrides.erase("dims");
    for (int d : dims) {
      const int T = 4 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
      nlohmann::json base{{"name", "dim_scaling_d" + std::to_string(d)},
                          {"target", "shifted_gaussian"},
                          {"dim", d},
                          {"shift", 3.0},
                          {"kernel", "lmc"},
                          {"backward", "tc_fwd"},
                          {"policy", "adapt_kl"},
                          {"schedule", "quadratic"},
                          {"T", T},
                          {"N", 1024},
                          {"B", 128},
                          {"replications", 16}};
      specs.push_back(spec_from_json(merged(std::move(base), overrides)));
    }
    return specs;
  }

  if (name == "ground-truth") {
    nlohmann::json base{{"name", "ground_truth"},  {"target", "funnel"},
                        {"dim", 10},               {"kernel", "lmc"},
                        {"backward", "tc_fwd"},    {"policy", "adapt_kl"},
                        {"schedule", "quadratic"}, {"T", 512},
                        {"N", 16384},              {"B", 128},
                        {"replications", 1}};
    specs.push_back(spec_from_json(merged(std::move(base), overrides)));
    return specs;
  }

  throw std::invalid_argument("unknown preset: " + name);
}

double nearest_rank_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("nearest_rank_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<long>(values.size());
  long rank = static_cast<long>(std::ceil(p * static_cast<double>(n)));
  rank = std::clamp(rank, 1L, n);
  return values[static_cast<std::size_t>(rank - 1)];
}

ExperimentOutput run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                int max_workers) {
  if (spec.replications < 1) throw std::invalid_argument("replications must be >= 1");
  const TargetModel target = make_target(spec);

  const int R = spec.replications;
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(R));
  std::vector<nlohmann::json> run_json(static_cast<std::size_t>(R));

  auto run_one = [&](int i) {
    ReplicationRecord& rec = records[static_cast<std::size_t>(i)];
    rec.seed = spec.run.seed + static_cast<std::uint64_t>(i);
    const auto start = std::chrono::steady_clock::now();
    try {
      RunConfig cfg = spec.run;
      cfg.seed = rec.seed;
      if (spec.rounds > 1) {
        RoundPlan plan = spec.round_plan;
        plan.r_max = spec.rounds;
        plan.t_initial = spec.num_steps;
        const RoundsResult rounds =
            run_rounds(target, spec.schedule_kind, spec.kernel, spec.policy, cfg, plan);
        const RoundRecord& last = rounds.rounds.back();
        rec.log_z_hat = last.log_z_hat;
        rec.total_objective_evals = 0;
        for (const RoundRecord& r : rounds.rounds)
          rec.total_objective_evals += r.result.total_objective_evals;
        run_json[static_cast<std::size_t>(i)] = to_json(rounds);
      } else {
        const AnnealedPath path(target, make_schedule(spec.schedule_kind, spec.num_steps));
        const RunResult result = smc_run(path, spec.kernel, spec.policy, cfg);
        rec.log_z_hat = result.log_z_hat;
        rec.total_objective_evals = result.total_objective_evals;
        run_json[static_cast<std::size_t>(i)] = to_json(result);
      }
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  int workers = max_workers > 0 ? max_workers
                                : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, R));
  if (workers == 1) {
    for (int i = 0; i < R; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int i = next.fetch_add(1); i < R; i = next.fetch_add(1)) run_one(i);
      });
    for (auto& th : pool) th.join();
  }

  ExperimentOutput out;
  out.replications = records;

  long evals = 0;
  int ok = 0;
  for (const ReplicationRecord& rec : records) {
    if (rec.failed) continue;
    out.summary.log_z_values.push_back(rec.log_z_hat);
    evals += rec.total_objective_evals;
    ++ok;
  }
  if (ok == 0) throw std::runtime_error("run_experiment: every replication failed");
  out.summary.median = nearest_rank_quantile(out.summary.log_z_values, 0.5);
  out.summary.quantile10 = nearest_rank_quantile(out.summary.log_z_values, 0.1);
  out.summary.quantile90 = nearest_rank_quantile(out.summary.log_z_values, 0.9);
  out.summary.mean_evals_per_step =
      static_cast<double>(evals) / (static_cast<double>(ok) * spec.num_steps);

  nlohmann::json reps = nlohmann::json::array();
  for (int i = 0; i < R; ++i) {
    const ReplicationRecord& rec = records[static_cast<std::size_t>(i)];
    nlohmann::json j{{"seed", rec.seed},
                     {"log_z_hat", rec.log_z_hat},
                     {"wall_time_s", rec.wall_time_s},
                     {"total_objective_evals", rec.total_objective_evals}};
    if (rec.failed)
      j["error"] = rec.error;
    else
      j["run"] = run_json[static_cast<std::size_t>(i)];
    reps.push_back(std::move(j));
  }
  out.diagnostics = nlohmann::json{{"spec", spec_to_json(spec)},
                                   {"replications", std::move(reps)},
                                   {"summary",
                                    {{"median", out.summary.median},
                                     {"quantile10", out.summary.quantile10},
                                     {"quantile90", out.summary.quantile90},
                                     {"mean_evals_per_step", out.summary.mean_evals_per_step}}}};

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_replications_csv(out_dir + "/" + spec.name + ".csv", out.replications);
    std::ofstream jf(out_dir + "/" + spec.name + ".json");
    jf << out.diagnostics.dump(2) << "\n";
  }
  return out;
}

void write_replications_csv(const std::string& path, const std::vector<ReplicationRecord>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << kCsvHeader << "\n";
  char buf[128];
  for (const ReplicationRecord& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", r.log_z_hat, r.wall_time_s);
    f << r.seed << "," << buf << "," << r.total_objective_evals << "\n";
  }
}

std::vector<ReplicationRecord> read_replications_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(f, line) || line != kCsvHeader)
    throw std::runtime_error("bad CSV header in " + path);
  std::vector<ReplicationRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    ReplicationRecord r;
    std::getline(ss, cell, ',');
    r.seed = std::stoull(cell);
    std::getline(ss, cell, ',');
    r.log_z_hat = std::stod(cell);
    std::getline(ss, cell, ',');
    r.wall_time_s = std::stod(cell);
    std::getline(ss, cell, ',');
    r.total_objective_evals = std::stol(cell);
    out.push_back(r);
  }
  return out;
}

}  // namespace smctune
