#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "smctune/adapt.hpp"
#include "smctune/kernels.hpp"
#include "smctune/model.hpp"
#include "smctune/resampling.hpp"

namespace smctune {

enum class KernelType { Lmc, Klmc, Mala };
enum class AdaptPolicy { Fixed, IncrementalKl, AcceptanceRate, Esjd };

KernelType kernel_type_from_string(const std::string& name);
std::string to_string(KernelType k);
BackwardKernelType backward_from_string(const std::string& name);
std::string to_string(BackwardKernelType b);
AdaptPolicy adapt_policy_from_string(const std::string& name);
std::string to_string(AdaptPolicy p);

struct KernelSpec {
  KernelType kernel = KernelType::Lmc;
  BackwardKernelType backward = BackwardKernelType::TimeCorrectForward;  // LMC only
};

/// How step parameters are chosen. Fixed runs use fixed_h/fixed_rho, or a
/// full per-step schedule when h_schedule (rho_schedule) is non-empty, which
/// is how a tuned schedule from an adaptive run is replayed.
struct PolicySpec {
  AdaptPolicy policy = AdaptPolicy::Fixed;
  double fixed_h = 0.1;
  double fixed_rho = 0.5;
  std::vector<double> h_schedule;
  std::vector<double> rho_schedule;
  AdaptConfig adapt;
};

struct RunConfig {
  int num_particles = 1024;
  double resample_threshold = 0.5;  // resample when ESS < threshold * N
  ResampleScheme scheme = ResampleScheme::Systematic;
  std::uint64_t seed = 0;
};

struct StepStats {
  int t = 0;
  double lambda = 0.0;
  double h = 0.0;
  std::optional<double> rho;
  double ess = 0.0;
  bool resampled = false;
  int degenerate_count = 0;
  std::optional<double> acc_rate;  // MALA only
  // Adaptation telemetry (absent for fixed runs).
  std::optional<long> objective_evals;
  std::optional<double> objective_value;
  std::optional<double> objective_unregularized;
  bool adapt_warning = false;
};

struct ParticleSystem {
  Eigen::MatrixXd positions;  // N x d
  Eigen::MatrixXd momenta;    // N x d (KLMC) or empty
  Eigen::VectorXd log_weights;
  double log_z_hat = 0.0;
  int step = 0;
};

struct StepParams {
  double h = 0.1;
  double h_prev = 0.1;  // backward step size for the time-correct kernel
  double rho = 0.5;     // KLMC only
};

struct RunResult {
  double log_z_hat = 0.0;
  std::vector<StepStats> steps;
  std::vector<double> tuned_h;    // actual step sizes used, length T
  std::vector<double> tuned_rho;  // KLMC only
  long total_objective_evals = 0;
};

/// One SMC step: propagate every particle with fresh noise, accumulate
/// log G_t into the weights, and resample (updating log Z_hat) when the ESS
/// drops below threshold * N or t = T.
StepStats smc_step(ParticleSystem& ps, const AnnealedPath& path, const KernelSpec& kernel,
                   const StepParams& params, int t, const RunConfig& cfg, Rng& rng);

/// Full adaptive (or fixed / replayed) SMC run. Deterministic given the
/// config seed; the returned schedule of tuned parameters replays bit-exactly
/// through a Fixed-policy run.
RunResult smc_run(const AnnealedPath& path, const KernelSpec& kernel, const PolicySpec& policy,
                  const RunConfig& cfg);

nlohmann::json to_json(const RunResult& result);

}  // namespace smctune
