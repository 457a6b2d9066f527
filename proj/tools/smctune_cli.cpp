#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smctune/experiment.hpp"

namespace {

nlohmann::json parse_override(const std::string& kv) {
  const auto pos = kv.find('=');
  if (pos == std::string::npos)
    throw CLI::ValidationError("--override expects key=value, got: " + kv);
  const std::string key = kv.substr(0, pos);
  const std::string raw = kv.substr(pos + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;  // bare strings (e.g. kernel=klmc, dims=16,64)
  }
  return nlohmann::json{{key, value}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SMC sampler experiment runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a study preset or a JSON experiment config");
  std::string what;
  run->add_option("preset", what, "preset name or path to a config.json")->required();
  std::string out_dir = "out";
  run->add_option("--out-dir", out_dir, "output directory for CSV/JSON results");
  long long seed = -1;
  run->add_option("--seed", seed, "base seed (overrides config)");
  int reps = -1;
  run->add_option("--reps", reps, "replication count (overrides config)");
  std::vector<std::string> override_kvs;
  run->add_option("--override", override_kvs, "config overrides as key=value");
  int workers = 0;
  run->add_option("--workers", workers, "worker pool size (default: hardware)");

  CLI11_PARSE(app, argc, argv);

  nlohmann::json overrides = nlohmann::json::object();
  try {
    for (const std::string& kv : override_kvs) {
      const nlohmann::json one = parse_override(kv);
      for (auto it = one.begin(); it != one.end(); ++it) overrides[it.key()] = it.value();
    }
    if (seed >= 0) overrides["seed"] = static_cast<std::uint64_t>(seed);
    if (reps > 0) overrides["replications"] = reps;

    std::vector<smctune::ExperimentSpec> specs;
    if (std::filesystem::exists(what) || what.ends_with(".json")) {
      std::ifstream f(what);
      if (!f) throw std::runtime_error("cannot open config: " + what);
      nlohmann::json cfg = nlohmann::json::parse(f);
      for (auto it = overrides.begin(); it != overrides.end(); ++it) cfg[it.key()] = it.value();
      specs.push_back(smctune::spec_from_json(cfg));
    } else {
      specs = smctune::expand_preset(what, overrides);
    }

    for (const smctune::ExperimentSpec& spec : specs) {
      const smctune::ExperimentOutput out = smctune::run_experiment(spec, out_dir, workers);
      int failures = 0;
      for (const auto& r : out.replications) failures += r.failed ? 1 : 0;
      std::printf("%-28s reps=%d  median=% .6f  q10=% .6f  q90=% .6f  evals/step=%.1f%s\n",
                  spec.name.c_str(), spec.replications, out.summary.median,
                  out.summary.quantile10, out.summary.quantile90,
                  out.summary.mean_evals_per_step,
                  failures ? ("  [" + std::to_string(failures) + " failed]").c_str() : "");
    }
    std::printf("results written to %s/\n", out_dir.c_str());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
