#pragma once

#include <Eigen/Core>

#include "smctune/model.hpp"

namespace smctune {

struct LmcParams {
  double h = 0.1;  // step size, > 0
};

struct KlmcParams {
  double h = 0.1;   // step size, > 0
  double rho = 0.5;  // momentum refreshment rate, in (0, 1)
};

struct AugmentedState {
  Eigen::VectorXd x;
  Eigen::VectorXd v;
};

/// Euler-Maruyama move: x + h grad log pi_lambda(x) + sqrt(2h) eps. This is
/// the reparameterized map M_t of the SAA objective; a non-finite gradient
/// surfaces as non-finite output (checked by callers).
Eigen::VectorXd lmc_map(const Eigen::VectorXd& x, const Eigen::VectorXd& eps, double h,
                        double lambda, const AnnealedPath& path);

/// log N(to; from + h grad log pi_lambda(from), 2h I).
double lmc_logpdf(const Eigen::VectorXd& from, const Eigen::VectorXd& to, double h, double lambda,
                  const AnnealedPath& path);

/// Partial momentum refreshment: sqrt(1 - rho^2) v + rho eps.
Eigen::VectorXd refresh_momentum(const Eigen::VectorXd& v, const Eigen::VectorXd& eps, double rho);

/// One leapfrog step (kick-drift-kick) of the Hamiltonian -log pi_lambda(x) + |v|^2/2.
/// The incoming v is the refreshed momentum.
AugmentedState leapfrog(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double h,
                        double lambda, const AnnealedPath& path);

struct KlmcStepResult {
  AugmentedState z;
  Eigen::VectorXd v_half;  // refreshed momentum; the potential needs it
};

/// OBABO-style kernel: refreshment followed by one leapfrog step.
KlmcStepResult klmc_step(const AugmentedState& z, const Eigen::VectorXd& eps_v,
                         const KlmcParams& params, double lambda, const AnnealedPath& path);

struct MalaResult {
  Eigen::VectorXd x;
  bool accepted = false;
  double alpha = 0.0;
};

/// LMC proposal with Metropolis-Hastings correction against pi_lambda.
/// Non-finite proposals auto-reject with alpha = 0.
MalaResult mala_step(const Eigen::VectorXd& x, const Eigen::VectorXd& eps, double u, double h,
                     double lambda, const AnnealedPath& path);

// Log-potentials. All returned in log domain; -inf means zero weight. The
// lam_* arguments are the annealing temperatures of steps t-1 and t.

/// First-step potential for the time-correct forward kernel family:
/// log gamma_1(x1) - log K_1^{h1}(x0, x1).
double log_potential_lmc_first(const AnnealedPath& path, double lam1, double h1,
                               const Eigen::VectorXd& x0, const Eigen::VectorXd& x1);

/// Time-correct forward kernel potential, t >= 2: the backward density is the
/// forward kernel of the previous step (step size h_prev, target pi_{t-1}).
double log_potential_lmc_tc_fwd(const AnnealedPath& path, double lam_prev, double lam_cur,
                                double h_prev, double h_cur, const Eigen::VectorXd& x_prev,
                                const Eigen::VectorXd& x_cur);

/// Forward kernel potential: backward density reuses the current kernel
/// (step size h_cur, target pi_t).
double log_potential_lmc_fwd(const AnnealedPath& path, double lam_prev, double lam_cur,
                             double h_cur, const Eigen::VectorXd& x_prev,
                             const Eigen::VectorXd& x_cur);

/// Detailed-balance-formula potential (also exact for MALA):
/// log gamma_t(x_prev) - log gamma_{t-1}(x_prev).
double log_potential_dbf(const AnnealedPath& path, double lam_prev, double lam_cur,
                         const Eigen::VectorXd& x_prev);

/// KLMC potential over the augmented state, given the refreshed momentum.
double log_potential_klmc(const AnnealedPath& path, double lam_prev, double lam_cur, double rho,
                          const AugmentedState& z_prev, const AugmentedState& z_cur,
                          const Eigen::VectorXd& v_half);

}  // namespace smctune
