#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

#include "smctune/math.hpp"

namespace smctune {

struct ParticleCollapse final : std::runtime_error {
  explicit ParticleCollapse(const std::string& what) : std::runtime_error(what) {}
};

enum class ResampleScheme { Systematic, Stratified, Multinomial };

ResampleScheme resample_scheme_from_string(const std::string& name);
std::string to_string(ResampleScheme scheme);

/// Kong's effective sample size (sum w)^2 / sum w^2, computed in log space as
/// exp(2 LSE(logw) - LSE(2 logw)). Throws ParticleCollapse if every weight is
/// zero.
double ess(const Eigen::VectorXd& log_weights);

/// Ancestor indices for M offspring drawn from the normalized weights.
/// Systematic guarantees offspring counts in {floor(M w), ceil(M w)};
/// multinomial draws i.i.d. categorical indices.
std::vector<int> resample(const Eigen::VectorXd& log_weights, int M, ResampleScheme scheme,
                          Rng& rng);

}  // namespace smctune
