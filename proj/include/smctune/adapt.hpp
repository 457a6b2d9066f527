#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "smctune/kernels.hpp"
#include "smctune/model.hpp"
#include "smctune/optim1d.hpp"

namespace smctune {

enum class BackwardKernelType { TimeCorrectForward, Forward, DetailedBalance };

/// Tuning knobs for the per-step adaptation solve. Defaults follow the
/// reported LMC configuration; klmc_defaults() gives the KLMC one.
struct AdaptConfig {
  double tau = 0.1;       // regularization weight, >= 0
  double epsilon = 0.01;  // optimizer absolute tolerance (log scale for h)
  double c = 0.1;         // exponential search coefficient
  double r = 2.0;         // exponential search exponent
  double delta = -1.0;    // backing-off step for FindFeasible
  double h_guess = std::exp(-10.0);
  int subsample = 128;    // B
  std::vector<double> xi = {0.1, 0.9};  // refreshment-rate grid
  double rho_guess = 0.1;
  int max_sweeps = 20;    // coordinate-descent cap for the KLMC solve

  static AdaptConfig lmc_defaults() { return AdaptConfig{}; }

  static AdaptConfig klmc_defaults() {
    AdaptConfig cfg;
    cfg.tau = 5.0;
    cfg.c = 0.01;
    cfg.r = 3.0;
    cfg.h_guess = std::exp(-7.5);
    return cfg;
  }

  SearchParams search_params() const { return SearchParams{c, r, epsilon, delta}; }
};

/// Frozen randomness for one adaptation solve (the SAA contract): one noise
/// row per subsampled particle, plus uniforms for the MALA variants.
struct NoiseBlock {
  Eigen::MatrixXd eps;       // B x d
  Eigen::VectorXd uniforms;  // B (MALA only)
};

/// Everything a per-step objective closes over. Immutable for the lifetime
/// of one solve; two solves on the same context return the same parameters.
struct ObjectiveContext {
  Eigen::MatrixXd positions;  // B x d, drawn by weighted resampling
  Eigen::MatrixXd momenta;    // B x d (KLMC only)
  NoiseBlock noise;
  int t = 1;
  double lambda_prev = 0.0;
  double lambda_cur = 1.0;
  double h_prev = 0.1;  // backward step size and regularizer anchor
  const AnnealedPath* path = nullptr;
};

/// Empirical incremental-KL objective in h for the LMC kernel:
/// -(1/B) sum_b log G_t(x_b, M_t(x_b; eps_b)) + tau (log h - log h_prev)^2.
/// Any degenerate particle term makes the whole evaluation +inf.
std::function<double(double)> build_lmc_objective(ObjectiveContext ctx,
                                                  BackwardKernelType backward, double tau);

/// Same objective over (h, rho) for the KLMC kernel.
std::function<double(double, double)> build_klmc_objective(ObjectiveContext ctx, double tau);

enum class MalaTuningMode { AcceptanceRate, Esjd };

inline constexpr double kMalaTargetAcceptRate = 0.574;

/// MALA baselines on the same frozen noise: acceptance-rate control
/// minimizes (mean alpha(h) - 0.574)^2, ESJD maximization minimizes
/// -(1/B) sum alpha_b(h) |y_b(h) - x_b|^2; both carry the tau regularizer.
std::function<double(double)> build_mala_objective(ObjectiveContext ctx, MalaTuningMode mode,
                                                   double tau);

struct AdaptResult {
  double h = 0.0;
  double rho = 0.0;              // meaningful for the KLMC solve only
  long objective_evals = 0;      // distinct objective evaluations
  double objective_value = 0.0;  // regularized objective at the accepted parameters
  int sweeps = 0;                // coordinate sweeps used (KLMC solve only)
  bool hit_sweep_cap = false;    // KLMC coordinate descent gave up before converging
};

/// Optimizes log h with FindFeasible (t = 1 only) followed by Minimize.
AdaptResult adapt_stepsize(const std::function<double(double)>& objective, int t, double h_guess,
                           const AdaptConfig& cfg);

/// Coordinate descent for (h, rho): Minimize over log h at fixed rho, then a
/// grid argmin over rho (first grid element wins ties). Stops when both
/// coordinate moves are <= epsilon; returns the current iterate with a
/// warning flag if the sweep cap is reached.
AdaptResult adapt_klmc(const std::function<double(double, double)>& objective, int t,
                       double h_guess, double rho_guess, const AdaptConfig& cfg);

/// MALA step size adaptation; same Minimize stack as adapt_stepsize.
AdaptResult adapt_mala(const std::function<double(double)>& objective, int t, double h_guess,
                       const AdaptConfig& cfg);

}  // namespace smctune
