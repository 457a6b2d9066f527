#include "smctune/optim1d.hpp"

#include <cmath>

namespace smctune {

namespace {
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
}

void SearchParams::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("SearchParams: c must be > 0");
  if (!(r > 1.0) || !std::isfinite(r)) throw std::invalid_argument("SearchParams: r must be > 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("SearchParams: epsilon must be > 0");
  if (delta == 0.0 || std::isnan(delta)) throw std::invalid_argument("SearchParams: delta must be nonzero");
}

double find_feasible(Objective1d& f, double x0, double delta, int max_steps) {
  if (delta == 0.0 || std::isnan(delta)) throw std::invalid_argument("find_feasible: delta must be nonzero");
  double x = x0;
  for (int k = 0; k <= max_steps; ++k) {
    if (f(x) < kInf) return x;
    x += delta;
  }
  throw NoFeasiblePoint("find_feasible: no feasible point found within " +
                        std::to_string(max_steps) + " steps from x0=" + std::to_string(x0));
}

Triplet bracket_minimum(Objective1d& f, double x0, double c, double r, int max_expansions) {
  if (!(c > 0.0)) throw std::invalid_argument("bracket_minimum: c must be > 0");
  if (!(r > 1.0)) throw std::invalid_argument("bracket_minimum: r must be > 1");
  if (!(f(x0) < kInf))
    throw std::invalid_argument("bracket_minimum: f(x0) must be finite");

  Triplet out;

  // Stage I: expand right until the first increase.
  double anchor = x0;
  double x = x0;
  double y = f(x);
  bool found = false;
  for (int k = 0; k < max_expansions; ++k) {
    const double xp = x0 + c * std::pow(r, static_cast<double>(k));
    const double yp = f(xp);
    if (y < yp) {
      out.c = xp;
      out.fc = yp;
      anchor = x;
      found = true;
      break;
    }
    x = xp;
    y = yp;
  }
  if (!found)
    throw BracketFailure("bracket_minimum: no increase found expanding right from x0=" +
                         std::to_string(x0));

  // Stage II: expand left of the stage-I anchor. x and y carry over; they
  // track the best point seen so far.
  found = false;
  for (int k = 0; k < max_expansions; ++k) {
    const double xp = anchor - c * std::pow(r, static_cast<double>(k));
    const double yp = f(xp);
    if (y < yp) {
      out.a = xp;
      out.fa = yp;
      out.b = x;
      out.fb = y;
      found = true;
      break;
    }
    x = xp;
    y = yp;
  }
  if (!found)
    throw BracketFailure("bracket_minimum: no increase found expanding left from anchor=" +
                         std::to_string(anchor));

  if (!out.valid())
    throw BracketFailure("bracket_minimum: produced an invalid triplet");
  return out;
}

int gss_iteration_bound(double width, double epsilon) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const double arg = 2.0 * (2.0 * kInvPhi - 1.0) * width / epsilon;
  if (arg <= 1.0) return 0;
  return static_cast<int>(std::ceil(std::log(arg) / std::log(phi)));
}

GssResult golden_section_search(Objective1d& f, const Triplet& t, double epsilon,
                                std::vector<double>* width_trace) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("golden_section_search: epsilon must be > 0");
  if (!t.valid()) throw std::invalid_argument("golden_section_search: invalid triplet");

  double x0 = t.a;
  double x3 = t.c;
  double x1, x2;
  if (std::abs(t.c - t.b) > std::abs(t.b - t.a)) {
    x1 = t.b;
    x2 = t.b + (1.0 - kInvPhi) * (t.c - t.b);
  } else {
    x2 = t.b;
    x1 = t.b - (1.0 - kInvPhi) * (t.b - t.a);
  }
  double f1 = f(x1);
  double f2 = f(x2);

  // The retained points always satisfy min(f1, f2) <= f(x0) and <= f(x3), so
  // a local minimum lies in (x0, x2) when f1 <= f2 and in (x1, x3) otherwise.
  // The distance from the returned probe to that minimum is bounded by its
  // larger adjacent segment; iterating until this bound is below epsilon
  // covers triplets whose midpoint is away from the golden point (for which
  // the |x1 - x2| test alone fires at the same iteration).
  const auto error_bound = [&] {
    return f1 <= f2 ? std::max(x1 - x0, x2 - x1) : std::max(x2 - x1, x3 - x2);
  };

  int iterations = 0;
  while (std::abs(x1 - x2) > epsilon / 2.0 || error_bound() > epsilon) {
    if (f2 < f1) {
      x0 = x1;
      x1 = x2;
      x2 = kInvPhi * x2 + (1.0 - kInvPhi) * x3;
      f1 = f2;
      f2 = f(x2);
    } else {
      x3 = x2;
      x2 = x1;
      x1 = kInvPhi * x1 + (1.0 - kInvPhi) * x0;
      f2 = f1;
      f1 = f(x1);
    }
    ++iterations;
    if (width_trace) width_trace->push_back(std::abs(x3 - x0));
  }
  return {f1 <= f2 ? x1 : x2, iterations};
}

MinimizeResult minimize(Objective1d& f, double x0, const SearchParams& params) {
  params.validate();
  if (!(f(x0) < kInf)) throw std::invalid_argument("minimize: f(x0) must be finite");
  MinimizeResult out;
  out.bracket = bracket_minimum(f, x0, params.c, params.r);
  const GssResult g = golden_section_search(f, out.bracket, params.epsilon);
  out.x = g.x;
  out.gss_iterations = g.iterations;
  return out;
}

}  // namespace smctune
