#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "smctune/schedule_adapt.hpp"

using namespace smctune;

namespace {

BarrierKnots knots_from(std::vector<double> lambdas, std::vector<double> increments) {
  BarrierKnots k;
  k.lambdas = std::move(lambdas);
  k.barrier.push_back(0.0);
  for (double inc : increments) k.barrier.push_back(k.barrier.back() + inc);
  return k;
}

bool schedule_valid(const Schedule& s) {
  if (s[0] != 0.0 || s[s.num_steps()] != 1.0) return false;
  for (int t = 1; t <= s.num_steps(); ++t)
    if (!(s[t] > s[t - 1])) return false;
  return true;
}

}  // namespace

TEST_CASE("barrier_increment") {
  CHECK(barrier_increment(0.0) == 0.0);
  CHECK(barrier_increment(4.0) == 2.0);
  CHECK(barrier_increment(-0.3) == 0.0);  // Monte Carlo noise clamps to zero
}

TEST_CASE("next_round_length") {
  CHECK(next_round_length(16.0, 2.0, 4096) == 32);
  CHECK(next_round_length(0.4, 2.0, 4096) == 2);     // clamped up
  CHECK(next_round_length(1e9, 2.0, 4096) == 4096);  // clamped down
}

TEST_CASE("remap_schedule") {
  SUBCASE("uniform barrier with T' = T reproduces the schedule to 1e-12") {
    const Schedule in = make_schedule(ScheduleKind::Quadratic, 8);
    BarrierKnots k;
    k.lambdas = in.lambdas();
    for (std::size_t i = 0; i < k.lambdas.size(); ++i)
      k.barrier.push_back(static_cast<double>(i));
    const Schedule out = remap_schedule(k, 8);
    REQUIRE(out.num_steps() == 8);
    for (int t = 0; t <= 8; ++t) CHECK(out[t] == doctest::Approx(in[t]).epsilon(1e-12));
  }
  SUBCASE("increments (1,0,0) over (0,1/3,2/3,1) with T'=2 give the hand inversion") {
    const BarrierKnots k = knots_from({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {1.0, 0.0, 0.0});
    const Schedule out = remap_schedule(k, 2);
    REQUIRE(out.num_steps() == 2);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(out[2] == 1.0);
  }
  SUBCASE("T' = 1 gives the bare endpoints") {
    const BarrierKnots k = knots_from({0.0, 0.5, 1.0}, {1.0, 2.0});
    const Schedule out = remap_schedule(k, 1);
    CHECK(out.num_steps() == 1);
    CHECK(out[0] == 0.0);
    CHECK(out[1] == 1.0);
  }
  SUBCASE("all-zero barrier falls back to the uniform schedule") {
    const BarrierKnots k = knots_from({0.0, 0.25, 1.0}, {0.0, 0.0});
    const Schedule out = remap_schedule(k, 4);
    for (int t = 0; t <= 4; ++t) CHECK(out[t] == doctest::Approx(t / 4.0));
  }
  SUBCASE("output always satisfies the schedule invariant") {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
      const int T = 2 + static_cast<int>(rng.uniform() * 12);
      std::vector<double> lambdas{0.0};
      for (int t = 1; t <= T; ++t) lambdas.push_back(lambdas.back() + rng.uniform() + 1e-3);
      for (double& l : lambdas) l /= lambdas.back();
      lambdas.front() = 0.0;
      lambdas.back() = 1.0;
      std::vector<double> incs;
      bool any = false;
      for (int t = 0; t < T; ++t) {
        const double inc = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
        any = any || inc > 0.0;
        incs.push_back(inc);
      }
      if (!any) incs[0] = 0.5;
      const BarrierKnots k = knots_from(lambdas, incs);
      const int t_new = 1 + static_cast<int>(rng.uniform() * 20);
      CHECK(schedule_valid(remap_schedule(k, t_new)));
    }
  }
  SUBCASE("barrier concentration pulls knots into the hot region") {
    // All of the barrier accumulates on the first lambda segment, so every
    // interior output knot lands inside it.
    const BarrierKnots k = knots_from({0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}, {1.0, 0.0, 0.0});
    const Schedule out = remap_schedule(k, 6);
    for (int t = 1; t < 6; ++t) CHECK(out[t] <= 1.0 / 3.0 + 1e-12);
  }
}

TEST_CASE("accumulate_barrier squares with the per-step telemetry") {
  const AnnealedPath path(make_shifted_gaussian(2, 2.0), make_schedule(ScheduleKind::Linear, 3));
  RunResult fake;
  for (int t = 1; t <= 3; ++t) {
    StepStats s;
    s.t = t;
    s.objective_unregularized = t == 2 ? 4.0 : 0.0;
    fake.steps.push_back(s);
  }
  const BarrierKnots k = accumulate_barrier(path, fake);
  REQUIRE(k.lambdas.size() == 4);
  CHECK(k.barrier[0] == 0.0);
  CHECK(k.barrier[1] == 0.0);
  CHECK(k.barrier[2] == 2.0);
  CHECK(k.barrier[3] == 2.0);
  CHECK(k.total() == 2.0);
}

TEST_CASE("run_rounds") {
  const TargetModel target = make_shifted_gaussian(2, 3.0);
  KernelSpec kernel{KernelType::Lmc, BackwardKernelType::TimeCorrectForward};
  PolicySpec policy;
  policy.policy = AdaptPolicy::IncrementalKl;
  policy.adapt.subsample = 16;
  RunConfig cfg;
  cfg.num_particles = 64;
  cfg.seed = 9;

  SUBCASE("a single round is one adaptive run without remapping") {
    RoundPlan plan;
    plan.r_max = 1;
    plan.t_initial = 6;
    const RoundsResult out = run_rounds(target, ScheduleKind::Quadratic, kernel, policy, cfg, plan);
    REQUIRE(out.rounds.size() == 1);
    CHECK(out.rounds[0].lambdas.size() == 7);
    CHECK(out.rounds[0].knots.total() >= 0.0);
  }
  SUBCASE("multi-round adaptation produces valid schedules and records history") {
    RoundPlan plan;
    plan.r_max = 3;
    plan.t_initial = 8;
    plan.t_max = 64;
    const RoundsResult out = run_rounds(target, ScheduleKind::Quadratic, kernel, policy, cfg, plan);
    REQUIRE(out.rounds.size() == 3);
    for (const RoundRecord& r : out.rounds) {
      CHECK(schedule_valid(Schedule(r.lambdas)));
      CHECK(r.knots.lambdas.size() == r.lambdas.size());
      CHECK(std::isfinite(r.log_z_hat));
    }
    const nlohmann::json j = to_json(out);
    REQUIRE(j["rounds"].size() == 3);
    CHECK(j["rounds"][1].contains("T"));
    CHECK(j["rounds"][1].contains("barrier_knots"));
  }
  SUBCASE("degenerate zero barrier keeps T and a uniform schedule") {
    // Target equal to the reference with the DBF potential: -log G is exactly
    // zero, so the tuned objective and every barrier increment vanish.
    const TargetModel ref = make_shifted_gaussian(2, 0.0);
    KernelSpec dbf{KernelType::Lmc, BackwardKernelType::DetailedBalance};
    RoundPlan plan;
    plan.r_max = 2;
    plan.t_initial = 4;
    const RoundsResult out = run_rounds(ref, ScheduleKind::Quadratic, dbf, policy, cfg, plan);
    REQUIRE(out.rounds.size() == 2);
    CHECK(out.rounds[0].degenerate_barrier);
    CHECK(out.rounds[1].lambdas.size() == 5);  // T kept
    for (int t = 0; t <= 4; ++t)
      CHECK(out.rounds[1].lambdas[static_cast<std::size_t>(t)] == doctest::Approx(t / 4.0));
  }
  SUBCASE("fixed policy is rejected") {
    PolicySpec fixed;
    RoundPlan plan;
    CHECK_THROWS_AS(run_rounds(target, ScheduleKind::Linear, kernel, fixed, cfg, plan),
                    std::invalid_argument);
  }
}
