#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "smctune/smc.hpp"

namespace smctune {

/// Accumulated local communication barrier: pairs (lambda_t, Lambda_hat(lambda_t))
/// with Lambda_hat(lambda_0) = 0 and both coordinates nondecreasing.
struct BarrierKnots {
  std::vector<double> lambdas;
  std::vector<double> barrier;

  double total() const { return barrier.empty() ? 0.0 : barrier.back(); }
};

struct RoundPlan {
  int r_max = 1;          // number of rounds
  int t_initial = 2;      // T for the first round
  double multiplier = 2.0;  // T_{r+1} = multiplier * Lambda_hat
  int t_max = 4096;       // safety clamp
};

/// Square root of the clamped per-step divergence estimate: the unregularized
/// adaptation objective at the tuned parameters estimates the incremental KL,
/// so sqrt(max(value, 0)) is the in-scope local-barrier proxy.
double barrier_increment(double unregularized_objective_value);

using BarrierEstimator = double (*)(double);

/// Builds the knot set from a run's per-step telemetry.
BarrierKnots accumulate_barrier(const AnnealedPath& path, const RunResult& result,
                                BarrierEstimator estimator = &barrier_increment);

/// Next-round length: round(multiplier * Lambda_hat), clamped to [2, t_max].
int next_round_length(double total_barrier, double multiplier, int t_max);

/// Inverse-barrier remap lambda*_t = Lambda_inv(Lambda_total * t / T'), using
/// monotone piecewise-linear interpolation of the knots. Duplicate barrier
/// values keep the left-most lambda; an all-zero barrier falls back to the
/// uniform schedule.
Schedule remap_schedule(const BarrierKnots& knots, int t_new);

struct RoundRecord {
  int round = 0;
  std::vector<double> lambdas;
  BarrierKnots knots;
  double log_z_hat = 0.0;
  RunResult result;
  bool degenerate_barrier = false;  // Lambda_hat was zero; schedule fell back to uniform
};

struct RoundsResult {
  std::vector<RoundRecord> rounds;
};

/// Round-based schedule adaptation: run adaptive SMC, estimate the barrier,
/// set T' = multiplier * Lambda_hat, remap, repeat. The tuned final step size
/// of round r warm-starts round r+1; round r uses seed cfg.seed + r - 1.
RoundsResult run_rounds(const TargetModel& target, ScheduleKind initial_kind,
                        const KernelSpec& kernel, PolicySpec policy, const RunConfig& cfg,
                        const RoundPlan& plan);

nlohmann::json to_json(const RoundsResult& rounds);

}  // namespace smctune
