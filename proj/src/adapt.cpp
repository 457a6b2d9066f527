#include "smctune/adapt.hpp"

#include <cmath>
#include <memory>

namespace smctune {

namespace {

double log_reg(double h, double h_prev, double tau) {
  const double d = std::log(h) - std::log(h_prev);
  return tau * d * d;
}

}  // namespace

std::function<double(double)> build_lmc_objective(ObjectiveContext ctx,
                                                  BackwardKernelType backward, double tau) {
  auto shared = std::make_shared<const ObjectiveContext>(std::move(ctx));
  const int B = static_cast<int>(shared->positions.rows());

  // Per-particle forward drift and time-(t-1) log-densities do not depend on
  // h; caching them makes every objective query cost one target evaluation
  // and one gradient per particle.
  auto drift = std::make_shared<Eigen::MatrixXd>(B, shared->positions.cols());
  auto lg_prev = std::make_shared<Eigen::VectorXd>(B);
  auto dbf_log_g = std::make_shared<Eigen::VectorXd>(B);
  for (int b = 0; b < B; ++b) {
    const Eigen::VectorXd x = shared->positions.row(b);
    drift->row(b) = shared->path->grad_at(shared->lambda_cur, x);
    (*lg_prev)(b) = shared->path->log_gamma_at(shared->lambda_prev, x);
    (*dbf_log_g)(b) = log_potential_dbf(*shared->path, shared->lambda_prev, shared->lambda_cur, x);
  }

  return [shared, drift, lg_prev, dbf_log_g, backward, tau, B](double h) -> double {
    if (!(h > 0.0) || !std::isfinite(h)) return kInf;
    const auto& c = *shared;
    const double sqrt2h = std::sqrt(2.0 * h);
    double total = 0.0;
    for (int b = 0; b < B; ++b) {
      const Eigen::VectorXd x = c.positions.row(b);
      const Eigen::VectorXd x_new =
          x + h * drift->row(b).transpose() + sqrt2h * c.noise.eps.row(b).transpose();
      if (!x_new.allFinite()) return kInf;
      double log_g;
      if (backward == BackwardKernelType::DetailedBalance) {
        log_g = (*dbf_log_g)(b);
      } else {
        const double lg_new = c.path->log_gamma_at(c.lambda_cur, x_new);
        if (lg_new == -kInf) return kInf;
        const double fwd =
            isotropic_normal_logpdf(x_new, x + h * drift->row(b).transpose(), 2.0 * h);
        // The time-correct chain falls back to the forward kernel at t = 1
        // (no previous-step kernel exists there).
        if (backward == BackwardKernelType::TimeCorrectForward && c.t > 1) {
          log_g = lg_new + lmc_logpdf(x_new, x, c.h_prev, c.lambda_prev, *c.path) -
                  (*lg_prev)(b) - fwd;
        } else {
          log_g = lg_new + lmc_logpdf(x_new, x, h, c.lambda_cur, *c.path) - (*lg_prev)(b) - fwd;
        }
      }
      if (std::isnan(log_g) || log_g == -kInf) return kInf;
      total -= log_g;
    }
    return total / B + log_reg(h, c.h_prev, tau);
  };
}

std::function<double(double, double)> build_klmc_objective(ObjectiveContext ctx, double tau) {
  auto shared = std::make_shared<const ObjectiveContext>(std::move(ctx));
  const int B = static_cast<int>(shared->positions.rows());

  auto lg_prev = std::make_shared<Eigen::VectorXd>(B);
  for (int b = 0; b < B; ++b)
    (*lg_prev)(b) = shared->path->log_gamma_at(shared->lambda_prev, shared->positions.row(b));

  return [shared, lg_prev, tau, B](double h, double rho) -> double {
    if (!(h > 0.0) || !std::isfinite(h)) return kInf;
    if (!(rho > 0.0) || !(rho < 1.0)) return kInf;
    const auto& c = *shared;
    const KlmcParams params{h, rho};
    double total = 0.0;
    for (int b = 0; b < B; ++b) {
      AugmentedState z{c.positions.row(b), c.momenta.row(b)};
      const KlmcStepResult step = klmc_step(z, c.noise.eps.row(b), params, c.lambda_cur, *c.path);
      if (!step.z.x.allFinite() || !step.z.v.allFinite()) return kInf;
      const double log_g =
          log_potential_klmc(*c.path, c.lambda_prev, c.lambda_cur, rho, z, step.z, step.v_half);
      if (std::isnan(log_g) || log_g == -kInf) return kInf;
      total -= log_g;
    }
    return total / B + log_reg(h, c.h_prev, tau);
  };
}

std::function<double(double)> build_mala_objective(ObjectiveContext ctx, MalaTuningMode mode,
                                                   double tau) {
  auto shared = std::make_shared<const ObjectiveContext>(std::move(ctx));
  const int B = static_cast<int>(shared->positions.rows());

  auto drift = std::make_shared<Eigen::MatrixXd>(B, shared->positions.cols());
  auto lg_cur = std::make_shared<Eigen::VectorXd>(B);
  for (int b = 0; b < B; ++b) {
    const Eigen::VectorXd x = shared->positions.row(b);
    drift->row(b) = shared->path->grad_at(shared->lambda_cur, x);
    (*lg_cur)(b) = shared->path->log_gamma_at(shared->lambda_cur, x);
  }

  return [shared, drift, lg_cur, mode, tau, B](double h) -> double {
    if (!(h > 0.0) || !std::isfinite(h)) return kInf;
    const auto& c = *shared;
    const double sqrt2h = std::sqrt(2.0 * h);
    double acc_sum = 0.0;
    double esjd_sum = 0.0;
    for (int b = 0; b < B; ++b) {
      const Eigen::VectorXd x = c.positions.row(b);
      const Eigen::VectorXd y =
          x + h * drift->row(b).transpose() + sqrt2h * c.noise.eps.row(b).transpose();
      if (!y.allFinite()) return kInf;
      double alpha = 0.0;
      const double ly = c.path->log_gamma_at(c.lambda_cur, y);
      if (ly != -kInf) {
        const double fwd =
            isotropic_normal_logpdf(y, x + h * drift->row(b).transpose(), 2.0 * h);
        const double log_ratio =
            ly + lmc_logpdf(y, x, h, c.lambda_cur, *c.path) - (*lg_cur)(b) - fwd;
        alpha = std::isnan(log_ratio) ? 0.0 : std::min(1.0, std::exp(log_ratio));
      }
      acc_sum += alpha;
      esjd_sum += alpha * (y - x).squaredNorm();
    }
    double value;
    if (mode == MalaTuningMode::AcceptanceRate) {
      const double diff = acc_sum / B - kMalaTargetAcceptRate;
      value = diff * diff;
    } else {
      value = -esjd_sum / B;
    }
    return value + log_reg(h, c.h_prev, tau);
  };
}

AdaptResult adapt_stepsize(const std::function<double(double)>& objective, int t, double h_guess,
                           const AdaptConfig& cfg) {
  Objective1d log_obj([&objective](double ell) { return objective(std::exp(ell)); });
  double ell = std::log(h_guess);
  if (t == 1) ell = find_feasible(log_obj, ell, cfg.delta);
  const MinimizeResult m = minimize(log_obj, ell, cfg.search_params());

  AdaptResult out;
  out.h = std::exp(m.x);
  out.objective_evals = static_cast<long>(log_obj.distinct_evals());
  out.objective_value = log_obj(m.x);
  return out;
}

AdaptResult adapt_klmc(const std::function<double(double, double)>& objective, int t,
                       double h_guess, double rho_guess, const AdaptConfig& cfg) {
  if (cfg.xi.empty()) throw std::invalid_argument("adapt_klmc: refreshment grid must be nonempty");

  // Memoize (log h, rho) pairs so repeated coordinate sweeps and the per-rho
  // slices all count distinct evaluations once.
  struct PairHash {
    std::size_t operator()(const std::pair<double, double>& p) const {
      return std::hash<double>()(p.first) ^ (std::hash<double>()(p.second) << 1);
    }
  };
  std::unordered_map<std::pair<double, double>, double, PairHash> cache;
  auto eval = [&](double ell, double rho) {
    const auto key = std::make_pair(ell, rho);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    double y = objective(std::exp(ell), rho);
    if (std::isnan(y)) y = kInf;
    cache.emplace(key, y);
    return y;
  };

  double ell = std::log(h_guess);
  double rho = rho_guess;
  if (t == 1) {
    Objective1d slice([&eval, rho](double l) { return eval(l, rho); });
    ell = find_feasible(slice, ell, cfg.delta);
  }

  AdaptResult out;
  double ell_next = ell;
  double rho_next = rho;
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    Objective1d slice([&eval, rho](double l) { return eval(l, rho); });
    ell_next = minimize(slice, ell, cfg.search_params()).x;

    rho_next = cfg.xi.front();
    double best = eval(ell_next, rho_next);
    for (std::size_t i = 1; i < cfg.xi.size(); ++i) {
      const double value = eval(ell_next, cfg.xi[i]);
      if (value < best) {  // strict: ties keep the earlier grid element
        best = value;
        rho_next = cfg.xi[i];
      }
    }

    ++out.sweeps;
    if (std::max(std::abs(ell - ell_next), std::abs(rho - rho_next)) <= cfg.epsilon) {
      ell = ell_next;
      rho = rho_next;
      out.hit_sweep_cap = false;
      break;
    }
    ell = ell_next;
    rho = rho_next;
    out.hit_sweep_cap = true;
  }

  out.h = std::exp(ell_next);
  out.rho = rho_next;
  out.objective_evals = static_cast<long>(cache.size());
  out.objective_value = eval(ell_next, rho_next);
  return out;
}

AdaptResult adapt_mala(const std::function<double(double)>& objective, int t, double h_guess,
                       const AdaptConfig& cfg) {
  return adapt_stepsize(objective, t, h_guess, cfg);
}

}  // namespace smctune
