#pragma once

#include <Eigen/Core>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smctune/math.hpp"

namespace smctune {

/// Unnormalized target log-density with analytic gradient. Points outside
/// the support map to -inf (never NaN); known_log_z holds the analytic log Z
/// when the density is normalized.
struct TargetModel {
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> log_gamma;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_log_gamma;
  std::optional<double> known_log_z;
  std::string name;
};

enum class ScheduleKind { Linear, Quadratic, Explicit };

/// Temperature schedule lambda_0 = 0 < ... < lambda_T = 1.
class Schedule {
 public:
  explicit Schedule(std::vector<double> lambdas);

  int num_steps() const { return static_cast<int>(lambdas_.size()) - 1; }  // T
  double operator[](int t) const { return lambdas_[static_cast<std::size_t>(t)]; }
  const std::vector<double>& lambdas() const { return lambdas_; }

 private:
  std::vector<double> lambdas_;
};

Schedule make_schedule(ScheduleKind kind, int T, const std::vector<double>* values = nullptr);

/// Geometric annealing path between the standard Gaussian reference and a
/// target: log gamma_t(x) = (1 - lambda_t) log q(x) + lambda_t log gamma(x).
/// Immutable after construction; evaluation is pure.
class AnnealedPath {
 public:
  AnnealedPath(TargetModel target, Schedule schedule)
      : target_(std::move(target)), schedule_(std::move(schedule)) {}

  int dim() const { return target_.dim; }
  int num_steps() const { return schedule_.num_steps(); }
  double lambda(int t) const { return schedule_[t]; }
  const Schedule& schedule() const { return schedule_; }
  const TargetModel& target() const { return target_; }

  double log_reference(const Eigen::VectorXd& x) const { return std_normal_logpdf(x); }

  double log_gamma_at(double lambda, const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_at(double lambda, const Eigen::VectorXd& x) const;

  double log_gamma(int t, const Eigen::VectorXd& x) const { return log_gamma_at(lambda(t), x); }
  Eigen::VectorXd grad(int t, const Eigen::VectorXd& x) const { return grad_at(lambda(t), x); }

 private:
  TargetModel target_;
  Schedule schedule_;
};

// Built-in targets.

/// N(shift * 1_d, I_d), normalized (log Z = 0).
TargetModel make_shifted_gaussian(int dim, double shift);

/// Neal's funnel: y ~ N(0, 3^2), x ~ N(0, e^y I_{d-1}); normalized.
TargetModel make_funnel(int dim);

/// Bayesian logistic regression with N(0, I) prior on the coefficients.
/// `design` must already carry the intercept column; dim = design.cols().
TargetModel make_logistic_regression(Eigen::MatrixXd design, Eigen::VectorXd labels);

/// CSV loader: header row, final column is the binary {0,1} label. Features
/// are z-standardized on load and an intercept column of ones is appended.
TargetModel load_logistic_regression_csv(const std::string& path);

/// Synthetic logistic regression dataset: X entries and the generating
/// coefficients are standard normal, labels Bernoulli(sigmoid(X~ beta)).
TargetModel make_synthetic_logistic_regression(int num_rows, int dim, std::uint64_t seed);

}  // namespace smctune
