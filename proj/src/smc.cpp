#include "smctune/smc.hpp"

#include <cmath>

namespace smctune {

KernelType kernel_type_from_string(const std::string& name) {
  if (name == "lmc") return KernelType::Lmc;
  if (name == "klmc") return KernelType::Klmc;
  if (name == "mala") return KernelType::Mala;
  throw std::invalid_argument("unknown kernel: " + name);
}

std::string to_string(KernelType k) {
  switch (k) {
    case KernelType::Lmc: return "lmc";
    case KernelType::Klmc: return "klmc";
    case KernelType::Mala: return "mala";
  }
  return "unknown";
}

BackwardKernelType backward_from_string(const std::string& name) {
  if (name == "tc_fwd") return BackwardKernelType::TimeCorrectForward;
  if (name == "fwd") return BackwardKernelType::Forward;
  if (name == "dbf") return BackwardKernelType::DetailedBalance;
  throw std::invalid_argument("unknown backward kernel: " + name);
}

std::string to_string(BackwardKernelType b) {
  switch (b) {
    case BackwardKernelType::TimeCorrectForward: return "tc_fwd";
    case BackwardKernelType::Forward: return "fwd";
    case BackwardKernelType::DetailedBalance: return "dbf";
  }
  return "unknown";
}

AdaptPolicy adapt_policy_from_string(const std::string& name) {
  if (name == "fixed") return AdaptPolicy::Fixed;
  if (name == "adapt_kl") return AdaptPolicy::IncrementalKl;
  if (name == "adapt_arc") return AdaptPolicy::AcceptanceRate;
  if (name == "adapt_esjd") return AdaptPolicy::Esjd;
  throw std::invalid_argument("unknown adaptation policy: " + name);
}

std::string to_string(AdaptPolicy p) {
  switch (p) {
    case AdaptPolicy::Fixed: return "fixed";
    case AdaptPolicy::IncrementalKl: return "adapt_kl";
    case AdaptPolicy::AcceptanceRate: return "adapt_arc";
    case AdaptPolicy::Esjd: return "adapt_esjd";
  }
  return "unknown";
}

namespace {

double sanitize_log_g(double log_g, int& degenerate_count) {
  if (std::isnan(log_g)) {
    ++degenerate_count;
    return -kInf;
  }
  return log_g;
}

void validate(const KernelSpec& kernel, const PolicySpec& policy, const RunConfig& cfg) {
  if (cfg.num_particles < 2) throw std::invalid_argument("RunConfig: need at least 2 particles");
  if (!(cfg.resample_threshold > 0.0) || cfg.resample_threshold > 1.0)
    throw std::invalid_argument("RunConfig: resample_threshold must be in (0, 1]");
  switch (policy.policy) {
    case AdaptPolicy::Fixed:
      break;
    case AdaptPolicy::IncrementalKl:
      if (kernel.kernel == KernelType::Mala)
        throw std::invalid_argument("incremental-KL adaptation is for unadjusted kernels");
      break;
    case AdaptPolicy::AcceptanceRate:
    case AdaptPolicy::Esjd:
      if (kernel.kernel != KernelType::Mala)
        throw std::invalid_argument("acceptance-rate/ESJD tuning needs the MALA kernel");
      break;
  }
  if (policy.policy != AdaptPolicy::Fixed) {
    if (policy.adapt.subsample < 1 || policy.adapt.subsample > cfg.num_particles)
      throw std::invalid_argument("AdaptConfig: subsample size B must satisfy 1 <= B <= N");
    if (kernel.kernel == KernelType::Klmc && policy.adapt.xi.empty())
      throw std::invalid_argument("AdaptConfig: refreshment grid must be nonempty for KLMC");
  }
}

}  // namespace

StepStats smc_step(ParticleSystem& ps, const AnnealedPath& path, const KernelSpec& kernel,
                   const StepParams& params, int t, const RunConfig& cfg, Rng& rng) {
  const int N = static_cast<int>(ps.positions.rows());
  const int d = static_cast<int>(ps.positions.cols());
  const double lam_prev = path.lambda(t - 1);
  const double lam_cur = path.lambda(t);

  StepStats stats;
  stats.t = t;
  stats.lambda = lam_cur;
  stats.h = params.h;
  if (kernel.kernel == KernelType::Klmc) stats.rho = params.rho;

  const Eigen::MatrixXd eps = rng.normal_matrix(N, d);
  Eigen::VectorXd uniforms;
  if (kernel.kernel == KernelType::Mala) uniforms = rng.uniform_vector(N);

  int accepted = 0;
  for (int n = 0; n < N; ++n) {
    const Eigen::VectorXd x = ps.positions.row(n);
    double log_g = 0.0;
    switch (kernel.kernel) {
      case KernelType::Lmc: {
        const Eigen::VectorXd x_new = lmc_map(x, eps.row(n), params.h, lam_cur, path);
        if (!x_new.allFinite()) {
          ps.positions.row(n) = x_new;
          ps.log_weights(n) = -kInf;
          ++stats.degenerate_count;
          continue;
        }
        switch (kernel.backward) {
          case BackwardKernelType::TimeCorrectForward:
            // At t = 1 there is no previous-step kernel; K_1 itself is the
            // one normalized backward kernel in the family (L_0 = q gives a
            // first-step weight with infinite variance at small h).
            log_g = t == 1 ? log_potential_lmc_fwd(path, lam_prev, lam_cur, params.h, x, x_new)
                           : log_potential_lmc_tc_fwd(path, lam_prev, lam_cur, params.h_prev,
                                                      params.h, x, x_new);
            break;
          case BackwardKernelType::Forward:
            log_g = log_potential_lmc_fwd(path, lam_prev, lam_cur, params.h, x, x_new);
            break;
          case BackwardKernelType::DetailedBalance:
            log_g = log_potential_dbf(path, lam_prev, lam_cur, x);
            break;
        }
        ps.positions.row(n) = x_new;
        break;
      }
      case KernelType::Klmc: {
        const AugmentedState z{x, ps.momenta.row(n)};
        const KlmcStepResult step =
            klmc_step(z, eps.row(n), KlmcParams{params.h, params.rho}, lam_cur, path);
        if (!step.z.x.allFinite() || !step.z.v.allFinite()) {
          ps.positions.row(n) = step.z.x;
          ps.momenta.row(n) = step.z.v;
          ps.log_weights(n) = -kInf;
          ++stats.degenerate_count;
          continue;
        }
        log_g = log_potential_klmc(path, lam_prev, lam_cur, params.rho, z, step.z, step.v_half);
        ps.positions.row(n) = step.z.x;
        ps.momenta.row(n) = step.z.v;
        break;
      }
      case KernelType::Mala: {
        // The DBF potential only involves the pre-move position; the move
        // itself is exactly pi_t-invariant.
        log_g = log_potential_dbf(path, lam_prev, lam_cur, x);
        const MalaResult res = mala_step(x, eps.row(n), uniforms(n), params.h, lam_cur, path);
        ps.positions.row(n) = res.x;
        if (res.accepted) ++accepted;
        break;
      }
    }
    log_g = sanitize_log_g(log_g, stats.degenerate_count);
    ps.log_weights(n) += log_g;
  }
  if (kernel.kernel == KernelType::Mala)
    stats.acc_rate = static_cast<double>(accepted) / static_cast<double>(N);

  stats.ess = ess(ps.log_weights);  // throws ParticleCollapse when all weights vanish

  const int T = path.num_steps();
  if (stats.ess < cfg.resample_threshold * N || t == T) {
    ps.log_z_hat += log_sum_exp(ps.log_weights) - std::log(static_cast<double>(N));
    const std::vector<int> ancestors = resample(ps.log_weights, N, cfg.scheme, rng);
    Eigen::MatrixXd new_pos(N, d);
    for (int n = 0; n < N; ++n) new_pos.row(n) = ps.positions.row(ancestors[static_cast<std::size_t>(n)]);
    ps.positions = std::move(new_pos);
    if (ps.momenta.size() > 0) {
      Eigen::MatrixXd new_mom(N, d);
      for (int n = 0; n < N; ++n) new_mom.row(n) = ps.momenta.row(ancestors[static_cast<std::size_t>(n)]);
      ps.momenta = std::move(new_mom);
    }
    ps.log_weights.setZero();
    stats.resampled = true;
  }
  ps.step = t;
  return stats;
}

RunResult smc_run(const AnnealedPath& path, const KernelSpec& kernel, const PolicySpec& policy,
                  const RunConfig& cfg) {
  validate(kernel, policy, cfg);
  const int N = cfg.num_particles;
  const int d = path.dim();
  const int T = path.num_steps();
  if (!policy.h_schedule.empty() && static_cast<int>(policy.h_schedule.size()) != T)
    throw std::invalid_argument("PolicySpec: h_schedule length must equal T");
  if (!policy.rho_schedule.empty() && static_cast<int>(policy.rho_schedule.size()) != T)
    throw std::invalid_argument("PolicySpec: rho_schedule length must equal T");

  Rng rng(cfg.seed);
  ParticleSystem ps;
  ps.positions = rng.normal_matrix(N, d);
  if (kernel.kernel == KernelType::Klmc) ps.momenta = rng.normal_matrix(N, d);
  ps.log_weights = Eigen::VectorXd::Zero(N);

  RunResult result;
  result.tuned_h.reserve(static_cast<std::size_t>(T));

  const AdaptConfig& acfg = policy.adapt;
  double h_prev = acfg.h_guess;
  double rho_prev = acfg.rho_guess;

  for (int t = 1; t <= T; ++t) {
    StepParams params;
    params.rho = policy.rho_schedule.empty() ? policy.fixed_rho
                                             : policy.rho_schedule[static_cast<std::size_t>(t - 1)];
    std::optional<AdaptResult> adapted;

    if (policy.policy == AdaptPolicy::Fixed) {
      params.h = policy.h_schedule.empty() ? policy.fixed_h
                                           : policy.h_schedule[static_cast<std::size_t>(t - 1)];
      params.h_prev = t == 1 ? params.h
                             : (policy.h_schedule.empty()
                                    ? policy.fixed_h
                                    : policy.h_schedule[static_cast<std::size_t>(t - 2)]);
    } else {
      const int B = acfg.subsample;
      ObjectiveContext ctx;
      ctx.noise.eps = rng.normal_matrix(B, d);
      if (policy.policy == AdaptPolicy::AcceptanceRate || policy.policy == AdaptPolicy::Esjd)
        ctx.noise.uniforms = rng.uniform_vector(B);
      const std::vector<int> sub = resample(ps.log_weights, B, cfg.scheme, rng);
      ctx.positions.resize(B, d);
      for (int b = 0; b < B; ++b) ctx.positions.row(b) = ps.positions.row(sub[static_cast<std::size_t>(b)]);
      if (kernel.kernel == KernelType::Klmc) {
        ctx.momenta.resize(B, d);
        for (int b = 0; b < B; ++b) ctx.momenta.row(b) = ps.momenta.row(sub[static_cast<std::size_t>(b)]);
      }
      ctx.t = t;
      ctx.lambda_prev = path.lambda(t - 1);
      ctx.lambda_cur = path.lambda(t);
      ctx.h_prev = h_prev;
      ctx.path = &path;

      const double h_guess = t == 1 ? acfg.h_guess : h_prev;
      switch (policy.policy) {
        case AdaptPolicy::IncrementalKl:
          if (kernel.kernel == KernelType::Klmc) {
            adapted = adapt_klmc(build_klmc_objective(std::move(ctx), acfg.tau), t, h_guess,
                                 t == 1 ? acfg.rho_guess : rho_prev, acfg);
          } else {
            adapted = adapt_stepsize(build_lmc_objective(std::move(ctx), kernel.backward, acfg.tau),
                                     t, h_guess, acfg);
          }
          break;
        case AdaptPolicy::AcceptanceRate:
          adapted = adapt_mala(
              build_mala_objective(std::move(ctx), MalaTuningMode::AcceptanceRate, acfg.tau), t,
              h_guess, acfg);
          break;
        case AdaptPolicy::Esjd:
          adapted = adapt_mala(build_mala_objective(std::move(ctx), MalaTuningMode::Esjd, acfg.tau),
                               t, h_guess, acfg);
          break;
        case AdaptPolicy::Fixed:
          break;
      }
      params.h = adapted->h;
      params.h_prev = t == 1 ? params.h : h_prev;
      if (kernel.kernel == KernelType::Klmc) params.rho = adapted->rho;
    }

    StepStats stats = smc_step(ps, path, kernel, params, t, cfg, rng);
    if (adapted) {
      stats.objective_evals = adapted->objective_evals;
      stats.objective_value = adapted->objective_value;
      const double anchor = t == 1 ? acfg.h_guess : h_prev;
      const double dlog = std::log(adapted->h) - std::log(anchor);
      stats.objective_unregularized = adapted->objective_value - acfg.tau * dlog * dlog;
      stats.adapt_warning = adapted->hit_sweep_cap;
      result.total_objective_evals += adapted->objective_evals;
    }
    result.steps.push_back(stats);
    result.tuned_h.push_back(params.h);
    if (kernel.kernel == KernelType::Klmc) result.tuned_rho.push_back(params.rho);

    h_prev = params.h;
    rho_prev = params.rho;
  }

  result.log_z_hat = ps.log_z_hat;
  return result;
}

nlohmann::json to_json(const RunResult& result) {
  nlohmann::json steps = nlohmann::json::array();
  for (const StepStats& s : result.steps) {
    nlohmann::json j{{"t", s.t},       {"lambda", s.lambda},
                     {"h", s.h},       {"ess", s.ess},
                     {"resampled", s.resampled}, {"degenerate_count", s.degenerate_count}};
    if (s.rho) j["rho"] = *s.rho;
    if (s.acc_rate) j["acc_rate"] = *s.acc_rate;
    if (s.objective_evals) j["evals"] = *s.objective_evals;
    if (s.objective_value) j["objective_value"] = *s.objective_value;
    if (s.objective_unregularized) j["objective_unregularized"] = *s.objective_unregularized;
    if (s.adapt_warning) j["adapt_warning"] = true;
    steps.push_back(std::move(j));
  }
  return nlohmann::json{{"log_z_hat", result.log_z_hat},
                        {"total_objective_evals", result.total_objective_evals},
                        {"steps", std::move(steps)}};
}

}  // namespace smctune
