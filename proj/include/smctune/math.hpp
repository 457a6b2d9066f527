#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace smctune {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kLog2Pi = 1.8378770664093454835606594728112353;

/// log(sum(exp(x))) without overflow. Returns -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> x) {
  double m = -kInf;
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

inline double log_sum_exp(const Eigen::VectorXd& x) {
  return log_sum_exp(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
}

/// Density of N(0, I_d) evaluated in log space.
inline double std_normal_logpdf(const Eigen::VectorXd& x) {
  return -0.5 * x.squaredNorm() - 0.5 * static_cast<double>(x.size()) * kLog2Pi;
}

/// Density of N(mean, sigma2 * I_d) evaluated in log space.
inline double isotropic_normal_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                                      double sigma2) {
  const double d = static_cast<double>(x.size());
  return -0.5 * (x - mean).squaredNorm() / sigma2 - 0.5 * d * (kLog2Pi + std::log(sigma2));
}

inline double log1p_exp(double x) {  // log(1 + e^x), overflow-safe
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// Deterministic RNG stream. Uniforms come straight from the top 53 bits of
/// mt19937_64 and normals from Box-Muller, so a given seed produces the same
/// draw sequence on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::acos(-1.0) * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  /// Filled row by row: particle index varies slowest.
  Eigen::MatrixXd normal_matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  Eigen::VectorXd uniform_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform();
    return v;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace smctune
