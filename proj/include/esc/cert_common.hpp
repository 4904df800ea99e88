#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "esc/errors.hpp"
#include "esc/quadmap.hpp"

namespace esc {

inline constexpr double kEpsilonCap = 1e3;
/// Closed-form boundaries are shrunk by this factor so the strict
/// inequality holds at the returned value.
inline constexpr double kBoundaryShrink = 1.0 - 1e-12;

struct Deltas {
  double D = 0.0;
  double D1 = 0.0;
  double D2 = 0.0;
  double D3 = 0.0;

  [[nodiscard]] double sum() const { return D1 + D2 + D3; }
};

struct DitherSums {
  double amp;        ///< sqrt(sum a_i^2)
  double gain_amp;   ///< sqrt(sum 4 g_i^2 / a_i^2)
};

inline DitherSums dither_sums(const GainSpec& g, const DitherSpec& d) {
  if (g.dim() != d.dim()) throw DimensionError("gain and dither dimensions differ");
  double a2 = 0.0, ga = 0.0;
  for (std::size_t i = 0; i < d.dim(); ++i) {
    const double a = d.amplitudes[i];
    if (a == 0.0) throw ConfigError("zero dither amplitude");
    a2 += a * a;
    ga += 4.0 * g.gains[i] * g.gains[i] / (a * a);
  }
  return {std::sqrt(a2), std::sqrt(ga)};
}

/// Delta constants shared by both time bases; `window` is 1 for continuous
/// time and T - 1 for discrete time.
inline Deltas compute_deltas(const UncertaintyModel& u, const GainSpec& g, const DitherSpec& d,
                             double sigma, double window) {
  if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
  const DitherSums s = dither_sums(g, d);
  Deltas r;
  r.D = (u.q_star_max + 0.5 * u.h_max * (sigma + s.amp) * (sigma + s.amp)) * s.gain_amp;
  r.D1 = window * u.h_max * g.max_abs() / 2.0;
  r.D2 = window * sigma * u.h_max / 2.0 * s.gain_amp;
  r.D3 = window * u.h_max / 2.0 * s.gain_amp * s.amp;
  return r;
}

/// Delta of the scalar closed forms: [Q*_M + H_M (sigma + |a|)^2 / 2] 2|g| / |a|.
inline double scalar_delta(const UncertaintyModel& u, const GainSpec& g, const DitherSpec& d,
                           double sigma) {
  if (d.dim() != 1 || g.dim() != 1) throw ConfigError("scalar route requires n = 1");
  const double a = std::abs(d.amplitudes[0]);
  if (a == 0.0) throw ConfigError("zero dither amplitude");
  return (u.q_star_max + 0.5 * u.h_max * (sigma + a) * (sigma + a)) * 2.0 * std::abs(g.gains[0]) / a;
}

/// Largest x with x * slope < gap, i.e. gap / slope shrunk to the open side,
/// capped at kEpsilonCap.
inline double linear_boundary(double gap, double slope) {
  if (!(gap > 0.0)) throw InfeasibleError("inequality has no positive solution");
  if (!(slope > 0.0)) return kEpsilonCap;
  return std::min(kEpsilonCap, gap / slope * kBoundaryShrink);
}

struct UltimateBound {
  double ub = 0.0;
  double sigma_final = 0.0;
  double sigma0_final = 0.0;
  std::vector<double> history;  ///< ub after each pass
};

/// Smallest sigma in [0, hi] for which holds(sigma) is true, given holds(hi).
template <class Pred>
double smallest_sigma(Pred&& holds, double hi, double tol = 1e-10) {
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (holds(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

/// Iterative ultimate-bound refinement.
///   holds(s0, s): the route inequality at the fixed operating epsilon
///   ball(s): ultimate-bound radius at sigma = s
/// Each pass shrinks sigma to its smallest admissible value, evaluates the
/// ball and, if it sits below s0 - beta (beta = beta_frac * s0), restarts from
/// s0 = ub + beta.
template <class Holds, class Ball>
UltimateBound iterate_ultimate_bound(Holds&& holds, Ball&& ball, double sigma0, double sigma,
                                     double beta_frac = 0.1, int max_iter = 100) {
  if (!(beta_frac > 0.0 && beta_frac < 1.0)) throw ConfigError("beta fraction must be in (0, 1)");
  UltimateBound r;
  double s0 = sigma0;
  double hi = sigma;
  for (int it = 0; it < max_iter; ++it) {
    if (!holds(s0, hi)) {
      if (it == 0) throw InfeasibleError("route inequality fails at the operating epsilon");
      break;
    }
    const double smin = smallest_sigma([&](double s) { return holds(s0, s); }, hi);
    const double ub = ball(smin);
    const bool settled = !r.history.empty() && std::abs(r.history.back() - ub) < 1e-9;
    r.history.push_back(ub);
    r.ub = ub;
    r.sigma_final = smin;
    r.sigma0_final = s0;
    if (settled) break;
    const double beta = beta_frac * s0;
    if (!(ub < s0 - beta)) break;
    s0 = ub + beta;
    hi = smin;
  }
  return r;
}

}  // namespace esc
