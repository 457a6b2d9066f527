#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "smctune/math.hpp"

namespace smctune {

struct NoFeasiblePoint final : std::runtime_error {
  explicit NoFeasiblePoint(const std::string& what) : std::runtime_error(what) {}
};

struct BracketFailure final : std::runtime_error {
  explicit BracketFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Memoizing wrapper around a scalar objective. All optimizer routines below
/// evaluate objectives through this class, which gives two guarantees:
///   - NaN results are mapped to +inf before they reach any comparison, so a
///     degenerate evaluation behaves exactly like an explicit +inf region;
///   - repeated queries at the same point hit the cache, so distinct_evals()
///     counts unique points only.
class Objective1d {
 public:
  explicit Objective1d(std::function<double(double)> fn) : fn_(std::move(fn)) {}

  double operator()(double x) {
    auto it = cache_.find(x);
    if (it != cache_.end()) return it->second;
    double y = fn_(x);
    if (std::isnan(y)) y = kInf;
    cache_.emplace(x, y);
    return y;
  }

  std::size_t distinct_evals() const { return cache_.size(); }

 private:
  std::function<double(double)> fn_;
  std::unordered_map<double, double> cache_;
};

/// Bracketing triple: a < b < c with f(b) <= f(a) < inf and f(b) <= f(c).
/// fc = +inf is admissible; the interval then still contains a local minimum
/// of the finite region.
struct Triplet {
  double a = 0.0, b = 0.0, c = 0.0;
  double fa = 0.0, fb = 0.0, fc = 0.0;

  bool valid() const {
    return a < b && b < c && fb <= fa && fa < kInf && fb <= fc && !std::isnan(fa) &&
           !std::isnan(fb) && !std::isnan(fc);
  }
};

struct SearchParams {
  double c = 0.1;       // exponential search coefficient, > 0
  double r = 2.0;       // exponential search exponent, > 1
  double epsilon = 1e-2;  // absolute tolerance, > 0
  double delta = -1.0;  // backing-off step, != 0

  void validate() const;
};

inline constexpr int kFindFeasibleMaxSteps = 10000;
inline constexpr int kBracketMaxExpansionsPerStage = 200;

/// Walks x0, x0 + delta, x0 + 2 delta, ... and returns the first point with a
/// finite objective value. Throws NoFeasiblePoint after max_steps moves.
double find_feasible(Objective1d& f, double x0, double delta,
                     int max_steps = kFindFeasibleMaxSteps);

/// Two-stage exponential search. Stage I expands to the right with offsets
/// c * r^k from x0 until the value increases; stage II expands to the left of
/// the stage-I anchor. Requires f(x0) < inf.
Triplet bracket_minimum(Objective1d& f, double x0, double c, double r,
                        int max_expansions = kBracketMaxExpansionsPerStage);

struct GssResult {
  double x = 0.0;
  int iterations = 0;
};

/// Golden section search on a valid triplet. The interior probes contract the
/// interval by 1/phi per iteration; terminates once |x1 - x2| <= epsilon / 2.
/// Ties f2 == f1 shrink the right side (the strict `f2 < f1` branch test).
/// If width_trace is given, |x3 - x0| is appended after every iteration.
GssResult golden_section_search(Objective1d& f, const Triplet& t, double epsilon,
                                std::vector<double>* width_trace = nullptr);

/// Closed-form iteration bound for golden_section_search on a triplet of
/// width w: ceil(log(2 (2/phi - 1) w / epsilon) / log phi).
int gss_iteration_bound(double width, double epsilon);

struct MinimizeResult {
  double x = 0.0;
  Triplet bracket;
  int gss_iterations = 0;
};

/// bracket_minimum followed by golden_section_search. Requires f(x0) < inf;
/// the result is epsilon-close to a local minimum (the global one when the
/// objective is unimodal on its finite region).
MinimizeResult minimize(Objective1d& f, double x0, const SearchParams& params);

}  // namespace smctune
