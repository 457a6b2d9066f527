#include "smctune/kernels.hpp"

#include <cmath>

namespace smctune {

Eigen::VectorXd lmc_map(const Eigen::VectorXd& x, const Eigen::VectorXd& eps, double h,
                        double lambda, const AnnealedPath& path) {
  return x + h * path.grad_at(lambda, x) + std::sqrt(2.0 * h) * eps;
}

double lmc_logpdf(const Eigen::VectorXd& from, const Eigen::VectorXd& to, double h, double lambda,
                  const AnnealedPath& path) {
  const Eigen::VectorXd mean = from + h * path.grad_at(lambda, from);
  return isotropic_normal_logpdf(to, mean, 2.0 * h);
}

Eigen::VectorXd refresh_momentum(const Eigen::VectorXd& v, const Eigen::VectorXd& eps, double rho) {
  return std::sqrt(1.0 - rho * rho) * v + rho * eps;
}

AugmentedState leapfrog(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h,
                        double lambda, const AnnealedPath& path) {
  const Eigen::VectorXd v_a = v + 0.5 * h * path.grad_at(lambda, x);
  AugmentedState out;
  out.x = x + h * v_a;
  out.v = v_a + 0.5 * h * path.grad_at(lambda, out.x);
  return out;
}

KlmcStepResult klmc_step(const AugmentedState& z, const Eigen::VectorXd& eps_v,
                         const KlmcParams& params, double lambda, const AnnealedPath& path) {
  KlmcStepResult out;
  out.v_half = refresh_momentum(z.v, eps_v, params.rho);
  out.z = leapfrog(z.x, out.v_half, params.h, lambda, path);
  return out;
}

MalaResult mala_step(const Eigen::VectorXd& x, const Eigen::VectorXd& eps, double u, double h,
                     double lambda, const AnnealedPath& path) {
  MalaResult out;
  const Eigen::VectorXd y = lmc_map(x, eps, h, lambda, path);
  if (!y.allFinite()) {
    out.x = x;
    out.alpha = 0.0;
    return out;
  }
  const double ly = path.log_gamma_at(lambda, y);
  if (ly == -kInf) {
    out.x = x;
    out.alpha = 0.0;
    return out;
  }
  const double lx = path.log_gamma_at(lambda, x);
  const double log_ratio = ly + lmc_logpdf(y, x, h, lambda, path) - lx -
                           lmc_logpdf(x, y, h, lambda, path);
  double alpha = std::isnan(log_ratio) ? 0.0 : std::min(1.0, std::exp(log_ratio));
  out.alpha = alpha;
  if (u < alpha) {
    out.x = y;
    out.accepted = true;
  } else {
    out.x = x;
  }
  return out;
}

double log_potential_lmc_first(const AnnealedPath& path, double lam1, double h1,
                               const Eigen::VectorXd& x0, const Eigen::VectorXd& x1) {
  const double lg = path.log_gamma_at(lam1, x1);
  if (lg == -kInf) return -kInf;
  return lg - lmc_logpdf(x0, x1, h1, lam1, path);
}

double log_potential_lmc_tc_fwd(const AnnealedPath& path, double lam_prev, double lam_cur,
                                double h_prev, double h_cur, const Eigen::VectorXd& x_prev,
                                const Eigen::VectorXd& x_cur) {
  const double lg_cur = path.log_gamma_at(lam_cur, x_cur);
  if (lg_cur == -kInf) return -kInf;
  const double lg_prev = path.log_gamma_at(lam_prev, x_prev);
  return lg_cur + lmc_logpdf(x_cur, x_prev, h_prev, lam_prev, path) - lg_prev -
         lmc_logpdf(x_prev, x_cur, h_cur, lam_cur, path);
}

double log_potential_lmc_fwd(const AnnealedPath& path, double lam_prev, double lam_cur,
                             double h_cur, const Eigen::VectorXd& x_prev,
                             const Eigen::VectorXd& x_cur) {
  const double lg_cur = path.log_gamma_at(lam_cur, x_cur);
  if (lg_cur == -kInf) return -kInf;
  const double lg_prev = path.log_gamma_at(lam_prev, x_prev);
  return lg_cur + lmc_logpdf(x_cur, x_prev, h_cur, lam_cur, path) - lg_prev -
         lmc_logpdf(x_prev, x_cur, h_cur, lam_cur, path);
}

double log_potential_dbf(const AnnealedPath& path, double lam_prev, double lam_cur,
                         const Eigen::VectorXd& x_prev) {
  const double lg_cur = path.log_gamma_at(lam_cur, x_prev);
  if (lg_cur == -kInf) return -kInf;
  return lg_cur - path.log_gamma_at(lam_prev, x_prev);
}

double log_potential_klmc(const AnnealedPath& path, double lam_prev, double lam_cur, double rho,
                          const AugmentedState& z_prev, const AugmentedState& z_cur,
                          const Eigen::VectorXd& v_half) {
  const double lg_cur = path.log_gamma_at(lam_cur, z_cur.x);
  if (lg_cur == -kInf) return -kInf;
  const double lg_prev = path.log_gamma_at(lam_prev, z_prev.x);
  const double rho2 = rho * rho;
  const double root = std::sqrt(1.0 - rho2);
  return lg_cur - lg_prev + std_normal_logpdf(z_cur.v) - std_normal_logpdf(z_prev.v) +
         isotropic_normal_logpdf(z_prev.v, root * v_half, rho2) -
         isotropic_normal_logpdf(v_half, root * z_prev.v, rho2);
}

}  // namespace smctune
