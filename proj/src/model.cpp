#include "smctune/model.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace smctune {

Schedule::Schedule(std::vector<double> lambdas) : lambdas_(std::move(lambdas)) {
  if (lambdas_.size() < 2) throw std::invalid_argument("Schedule: need at least two temperatures");
  if (lambdas_.front() != 0.0) throw std::invalid_argument("Schedule: lambda_0 must be 0");
  if (lambdas_.back() != 1.0) throw std::invalid_argument("Schedule: lambda_T must be 1");
  for (std::size_t i = 1; i < lambdas_.size(); ++i)
    if (!(lambdas_[i] > lambdas_[i - 1]))
      throw std::invalid_argument("Schedule: temperatures must be strictly increasing");
}

Schedule make_schedule(ScheduleKind kind, int T, const std::vector<double>* values) {
  switch (kind) {
    case ScheduleKind::Linear: {
      if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
      std::vector<double> l(static_cast<std::size_t>(T) + 1);
      for (int t = 0; t <= T; ++t) l[static_cast<std::size_t>(t)] = static_cast<double>(t) / T;
      l.back() = 1.0;
      return Schedule(std::move(l));
    }
    case ScheduleKind::Quadratic: {
      if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
      std::vector<double> l(static_cast<std::size_t>(T) + 1);
      for (int t = 0; t <= T; ++t) {
        const double u = static_cast<double>(t) / T;
        l[static_cast<std::size_t>(t)] = u * u;
      }
      l.back() = 1.0;
      return Schedule(std::move(l));
    }
    case ScheduleKind::Explicit:
      if (values == nullptr) throw std::invalid_argument("make_schedule: explicit kind needs values");
      return Schedule(*values);
  }
  throw std::invalid_argument("make_schedule: unknown kind");
}

double AnnealedPath::log_gamma_at(double lambda, const Eigen::VectorXd& x) const {
  // Endpoints return the reference / target values bit-exactly; the interior
  // uses lq + lambda (lg - lq), which keeps the potential of an identical
  // target and reference at exactly zero.
  if (lambda == 0.0) return log_reference(x);
  const double lg = target_.log_gamma(x);
  if (lambda == 1.0) return lg;
  if (lg == -kInf) return -kInf;
  const double lq = log_reference(x);
  return lq + lambda * (lg - lq);
}

Eigen::VectorXd AnnealedPath::grad_at(double lambda, const Eigen::VectorXd& x) const {
  if (lambda == 0.0) return -x;
  Eigen::VectorXd g = target_.grad_log_gamma(x);
  if (lambda == 1.0) return g;
  return -x + lambda * (g + x);
}

TargetModel make_shifted_gaussian(int dim, double shift) {
  if (dim < 1) throw std::invalid_argument("make_shifted_gaussian: dim must be >= 1");
  TargetModel m;
  m.dim = dim;
  m.name = "shifted_gaussian";
  m.known_log_z = 0.0;
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(dim, shift);
  m.log_gamma = [mean](const Eigen::VectorXd& x) { return std_normal_logpdf(x - mean); };
  m.grad_log_gamma = [mean](const Eigen::VectorXd& x) -> Eigen::VectorXd { return mean - x; };
  return m;
}

TargetModel make_funnel(int dim) {
  if (dim < 2) throw std::invalid_argument("make_funnel: dim must be >= 2");
  TargetModel m;
  m.dim = dim;
  m.name = "funnel";
  m.known_log_z = 0.0;
  m.log_gamma = [dim](const Eigen::VectorXd& x) {
    const double y = x(0);
    const double ey = std::exp(-y);
    double lp = -y * y / 18.0 - 0.5 * std::log(9.0) - 0.5 * kLog2Pi;
    double sq = 0.0;
    for (int i = 1; i < dim; ++i) sq += x(i) * x(i);
    const double cross = sq == 0.0 ? 0.0 : -0.5 * ey * sq;  // avoid inf * 0
    lp += cross - 0.5 * (dim - 1) * (y + kLog2Pi);
    if (std::isnan(lp)) return -kInf;
    return lp;
  };
  m.grad_log_gamma = [dim](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const double y = x(0);
    const double ey = std::exp(-y);
    Eigen::VectorXd g(dim);
    double sq = 0.0;
    for (int i = 1; i < dim; ++i) sq += x(i) * x(i);
    g(0) = -y / 9.0 + 0.5 * ey * sq - 0.5 * (dim - 1);
    for (int i = 1; i < dim; ++i) g(i) = -ey * x(i);
    return g;
  };
  return m;
}

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

}  // namespace

TargetModel make_logistic_regression(Eigen::MatrixXd design, Eigen::VectorXd labels) {
  if (design.rows() != labels.size())
    throw std::invalid_argument("make_logistic_regression: row/label count mismatch");
  const int dim = static_cast<int>(design.cols());
  TargetModel m;
  m.dim = dim;
  m.name = "logistic_regression";
  auto X = std::make_shared<Eigen::MatrixXd>(std::move(design));
  auto y = std::make_shared<Eigen::VectorXd>(std::move(labels));
  m.log_gamma = [X, y, dim](const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = (*X) * beta;
    double ll = 0.0;
    for (Eigen::Index n = 0; n < eta.size(); ++n) {
      // y log sigma(eta) + (1 - y) log(1 - sigma(eta)), in stable form
      ll += (*y)(n) * eta(n) - log1p_exp(eta(n));
    }
    return ll + std_normal_logpdf(beta);
  };
  m.grad_log_gamma = [X, y](const Eigen::VectorXd& beta) -> Eigen::VectorXd {
    const Eigen::VectorXd eta = (*X) * beta;
    Eigen::VectorXd p(eta.size());
    for (Eigen::Index n = 0; n < eta.size(); ++n) p(n) = sigmoid(eta(n));
    return X->transpose() * ((*y) - p) - beta;
  };
  return m;
}

TargetModel load_logistic_regression_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_logistic_regression_csv: cannot open " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_logistic_regression_csv: empty file " + path);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("load_logistic_regression_csv: ragged row in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().size() < 2)
    throw std::runtime_error("load_logistic_regression_csv: need at least one feature column");

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(rows.front().size()) - 1;
  Eigen::MatrixXd features(n, p);
  Eigen::VectorXd labels(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) features(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    const double lab = rows[static_cast<std::size_t>(i)].back();
    if (lab != 0.0 && lab != 1.0)
      throw std::runtime_error("load_logistic_regression_csv: labels must be 0 or 1");
    labels(i) = lab;
  }

  // z-standardize each feature column; constant columns are left centered.
  for (int j = 0; j < p; ++j) {
    const double mean = features.col(j).mean();
    features.col(j).array() -= mean;
    const double sd = std::sqrt(features.col(j).squaredNorm() / n);
    if (sd > 0.0) features.col(j) /= sd;
  }

  Eigen::MatrixXd design(n, p + 1);
  design.leftCols(p) = features;
  design.col(p).setOnes();
  return make_logistic_regression(std::move(design), std::move(labels));
}

TargetModel make_synthetic_logistic_regression(int num_rows, int dim, std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("make_synthetic_logistic_regression: dim must be >= 2");
  Rng rng(seed);
  const int p = dim - 1;
  Eigen::MatrixXd design(num_rows, dim);
  design.leftCols(p) = rng.normal_matrix(num_rows, p);
  design.col(p).setOnes();
  const Eigen::VectorXd beta_true = rng.normal_vector(dim);
  Eigen::VectorXd labels(num_rows);
  for (int i = 0; i < num_rows; ++i) {
    const double pr = sigmoid(design.row(i).dot(beta_true));
    labels(i) = rng.uniform() < pr ? 1.0 : 0.0;
  }
  return make_logistic_regression(std::move(design), std::move(labels));
}

}  // namespace smctune
