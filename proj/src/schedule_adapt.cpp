#include "smctune/schedule_adapt.hpp"

#include <algorithm>
#include <cmath>

namespace smctune {

double barrier_increment(double unregularized_objective_value) {
  return std::sqrt(std::max(unregularized_objective_value, 0.0));
}

BarrierKnots accumulate_barrier(const AnnealedPath& path, const RunResult& result,
                                BarrierEstimator estimator) {
  BarrierKnots knots;
  const int T = path.num_steps();
  knots.lambdas.reserve(static_cast<std::size_t>(T) + 1);
  knots.barrier.reserve(static_cast<std::size_t>(T) + 1);
  knots.lambdas.push_back(path.lambda(0));
  knots.barrier.push_back(0.0);
  double cum = 0.0;
  for (int t = 1; t <= T; ++t) {
    const StepStats& s = result.steps[static_cast<std::size_t>(t - 1)];
    const double value = s.objective_unregularized.value_or(0.0);
    cum += estimator(value);
    knots.lambdas.push_back(path.lambda(t));
    knots.barrier.push_back(cum);
  }
  return knots;
}

int next_round_length(double total_barrier, double multiplier, int t_max) {
  const int t = static_cast<int>(std::lround(multiplier * total_barrier));
  return std::clamp(t, 2, t_max);
}

Schedule remap_schedule(const BarrierKnots& knots, int t_new) {
  if (t_new < 1) throw std::invalid_argument("remap_schedule: T' must be >= 1");
  if (knots.lambdas.size() != knots.barrier.size() || knots.lambdas.size() < 2)
    throw std::invalid_argument("remap_schedule: invalid knot set");

  const double total = knots.total();
  if (!(total > 0.0)) return make_schedule(ScheduleKind::Linear, t_new);

  // Collapse duplicate barrier values, keeping the left-most lambda, so the
  // inverse map is single-valued.
  std::vector<double> bs, ls;
  bs.push_back(knots.barrier.front());
  ls.push_back(knots.lambdas.front());
  for (std::size_t i = 1; i < knots.barrier.size(); ++i) {
    if (knots.barrier[i] > bs.back()) {
      bs.push_back(knots.barrier[i]);
      ls.push_back(knots.lambdas[i]);
    }
  }

  std::vector<double> lambdas(static_cast<std::size_t>(t_new) + 1);
  lambdas.front() = 0.0;
  lambdas.back() = 1.0;
  for (int t = 1; t < t_new; ++t) {
    const double target = total * static_cast<double>(t) / t_new;
    const auto hi = std::upper_bound(bs.begin(), bs.end(), target);
    const std::size_t j = std::min(static_cast<std::size_t>(hi - bs.begin()), bs.size() - 1);
    const std::size_t i = j == 0 ? 0 : j - 1;
    double lam;
    if (j == i) {
      lam = ls[j];
    } else {
      const double w = (target - bs[i]) / (bs[j] - bs[i]);
      lam = ls[i] + w * (ls[j] - ls[i]);
    }
    lambdas[static_cast<std::size_t>(t)] = std::min(std::max(lam, 0.0), 1.0);
  }

  // Numerical ties would violate strict monotonicity; nudge them apart.
  for (std::size_t i = 1; i < lambdas.size(); ++i) {
    if (lambdas[i] <= lambdas[i - 1])
      lambdas[i] = std::nextafter(lambdas[i - 1], kInf);
  }
  if (lambdas.back() != 1.0) lambdas.back() = 1.0;
  if (lambdas[lambdas.size() - 2] >= 1.0)
    throw std::runtime_error("remap_schedule: schedule collapsed at the right endpoint");
  return Schedule(std::move(lambdas));
}

RoundsResult run_rounds(const TargetModel& target, ScheduleKind initial_kind,
                        const KernelSpec& kernel, PolicySpec policy, const RunConfig& cfg,
                        const RoundPlan& plan) {
  if (plan.r_max < 1) throw std::invalid_argument("RoundPlan: r_max must be >= 1");
  if (plan.t_initial < 2) throw std::invalid_argument("RoundPlan: T_1 must be >= 2");
  if (policy.policy == AdaptPolicy::Fixed)
    throw std::invalid_argument("run_rounds: schedule adaptation needs an adaptive policy");

  RoundsResult out;
  Schedule schedule = make_schedule(initial_kind, plan.t_initial);
  for (int r = 1; r <= plan.r_max; ++r) {
    AnnealedPath path(target, schedule);
    RunConfig round_cfg = cfg;
    round_cfg.seed = cfg.seed + static_cast<std::uint64_t>(r - 1);
    RunResult result = smc_run(path, kernel, policy, round_cfg);

    RoundRecord record;
    record.round = r;
    record.lambdas = schedule.lambdas();
    record.knots = accumulate_barrier(path, result);
    record.log_z_hat = result.log_z_hat;

    // Warm-start the next round's adaptation from this round's final tuned
    // step size (and refreshment rate).
    if (!result.tuned_h.empty()) policy.adapt.h_guess = result.tuned_h.back();
    if (!result.tuned_rho.empty()) policy.adapt.rho_guess = result.tuned_rho.back();

    if (r < plan.r_max) {
      const double total = record.knots.total();
      if (total > 0.0) {
        const int t_next = next_round_length(total, plan.multiplier, plan.t_max);
        schedule = remap_schedule(record.knots, t_next);
      } else {
        record.degenerate_barrier = true;
        schedule = make_schedule(ScheduleKind::Linear, schedule.num_steps());
      }
    }
    record.result = std::move(result);
    out.rounds.push_back(std::move(record));
  }
  return out;
}

nlohmann::json to_json(const RoundsResult& rounds) {
  nlohmann::json arr = nlohmann::json::array();
  for (const RoundRecord& r : rounds.rounds) {
    nlohmann::json knots = nlohmann::json::array();
    for (std::size_t i = 0; i < r.knots.lambdas.size(); ++i)
      knots.push_back({r.knots.lambdas[i], r.knots.barrier[i]});
    arr.push_back(nlohmann::json{{"round", r.round},
                                 {"T", static_cast<int>(r.lambdas.size()) - 1},
                                 {"lambdas", r.lambdas},
                                 {"barrier_knots", std::move(knots)},
                                 {"log_z_hat", r.log_z_hat},
                                 {"degenerate_barrier", r.degenerate_barrier}});
  }
  return nlohmann::json{{"rounds", std::move(arr)}};
}

}  // namespace smctune
