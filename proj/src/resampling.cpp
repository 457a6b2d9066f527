#include "smctune/resampling.hpp"

#include <cmath>

namespace smctune {

ResampleScheme resample_scheme_from_string(const std::string& name) {
  if (name == "systematic") return ResampleScheme::Systematic;
  if (name == "stratified") return ResampleScheme::Stratified;
  if (name == "multinomial") return ResampleScheme::Multinomial;
  throw std::invalid_argument("unknown resampling scheme: " + name);
}

std::string to_string(ResampleScheme scheme) {
  switch (scheme) {
    case ResampleScheme::Systematic: return "systematic";
    case ResampleScheme::Stratified: return "stratified";
    case ResampleScheme::Multinomial: return "multinomial";
  }
  return "unknown";
}

double ess(const Eigen::VectorXd& log_weights) {
  const double lse1 = log_sum_exp(log_weights);
  if (lse1 == -kInf)
    throw ParticleCollapse("ess: all particle weights are zero");
  const Eigen::VectorXd doubled = 2.0 * log_weights;
  return std::exp(2.0 * lse1 - log_sum_exp(doubled));
}

namespace {

Eigen::VectorXd normalized_weights(const Eigen::VectorXd& log_weights) {
  const double lse = log_sum_exp(log_weights);
  if (lse == -kInf)
    throw ParticleCollapse("resample: all particle weights are zero");
  Eigen::VectorXd w(log_weights.size());
  for (Eigen::Index n = 0; n < w.size(); ++n) w(n) = std::exp(log_weights(n) - lse);
  return w;
}

}  // namespace

std::vector<int> resample(const Eigen::VectorXd& log_weights, int M, ResampleScheme scheme,
                          Rng& rng) {
  if (M < 1) throw std::invalid_argument("resample: M must be >= 1");
  const Eigen::VectorXd w = normalized_weights(log_weights);
  const int N = static_cast<int>(w.size());
  std::vector<int> ancestors(static_cast<std::size_t>(M));

  switch (scheme) {
    case ResampleScheme::Systematic: {
      const double u0 = 1.0 - rng.uniform();  // (0, 1]: equal weights map to the identity
      int n = 0;
      double cum = w(0);
      for (int m = 0; m < M; ++m) {
        const double target = (static_cast<double>(m) + u0) / M;
        while (cum < target && n < N - 1) cum += w(++n);
        ancestors[static_cast<std::size_t>(m)] = n;
      }
      break;
    }
    case ResampleScheme::Stratified: {
      int n = 0;
      double cum = w(0);
      for (int m = 0; m < M; ++m) {
        const double target = (static_cast<double>(m) + (1.0 - rng.uniform())) / M;
        while (cum < target && n < N - 1) cum += w(++n);
        ancestors[static_cast<std::size_t>(m)] = n;
      }
      break;
    }
    case ResampleScheme::Multinomial: {
      for (int m = 0; m < M; ++m) {
        const double u = rng.uniform();
        int n = 0;
        double cum = w(0);
        while (cum < u && n < N - 1) cum += w(++n);
        ancestors[static_cast<std::size_t>(m)] = n;
      }
      break;
    }
  }
  return ancestors;
}

}  // namespace smctune
