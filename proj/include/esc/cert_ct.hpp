#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "esc/cert_common.hpp"
#include "esc/errors.hpp"
#include "esc/lmi.hpp"
#include "esc/quadmap.hpp"

namespace esc {

enum class CtRoute { theorem1, corollary1, remark3 };

inline const char* to_string(CtRoute r) {
  switch (r) {
    case CtRoute::theorem1: return "theorem1";
    case CtRoute::corollary1: return "corollary1";
    case CtRoute::remark3: return "remark3";
  }
  return "?";
}

inline Deltas compute_deltas_ct(const UncertaintyModel& u, const GainSpec& g, const DitherSpec& d,
                                double sigma) {
  return compute_deltas(u, g, d, sigma, 1.0);
}

/// Everything a continuous route needs besides sigma0, sigma and epsilon.
struct CtProblem {
  CtRoute route = CtRoute::corollary1;
  UncertaintyModel uncertainty;
  GainSpec gains;
  DitherSpec dither;
  double delta = 0.0;  ///< decay rate
  double p = 1.0;
  std::optional<LmiCertificate> lmi;
};

/// The diagonal closed form is valid for a declared-diagonal Hessian, and
/// for uniform gains k I with any symmetric Hessian.
inline bool diagonal_route_allowed(const UncertaintyModel& u, const GainSpec& g) {
  return u.diagonal || g.uniform();
}

inline double default_delta_corollary1(const UncertaintyModel& u, const GainSpec& g) {
  return u.h_min * g.min_abs();
}

/// Builds the problem for a route. A positive rate_override replaces the
/// route's derived decay rate; theorem1 runs the LMI search when lmi is empty.
inline CtProblem make_ct_problem(CtRoute route, const UncertaintyModel& u, const GainSpec& g,
                                 const DitherSpec& d, double rate_override = 0.0,
                                 std::optional<LmiCertificate> lmi = std::nullopt) {
  validate(u);
  validate(g, u.hessian_nominal);
  validate(d);
  if (d.base != TimeBase::continuous) throw ConfigError("continuous route needs a continuous dither");
  if (d.dim() != u.dim()) throw DimensionError("dither and uncertainty dimensions differ");
  CtProblem pb{route, u, g, d, 0.0, 1.0, std::nullopt};
  switch (route) {
    case CtRoute::theorem1: {
      if (!lmi) lmi = search_certificate(u, g, Mode::ct);
      if (lmi->mode != Mode::ct) throw ConfigError("continuous route needs a continuous LMI certificate");
      if (!check(*lmi, u, g).feasible) throw InfeasibleError("LMI certificate is not feasible");
      pb.delta = lmi->rate;
      pb.p = lmi->p;
      pb.lmi = lmi;
      break;
    }
    case CtRoute::corollary1:
      if (!diagonal_route_allowed(u, g))
        throw ConfigError("diagonal route needs a diagonal Hessian declaration or uniform gains");
      pb.delta = default_delta_corollary1(u, g);
      break;
    case CtRoute::remark3:
      if (u.dim() != 1) throw ConfigError("scalar route requires n = 1");
      pb.delta = std::abs(g.gains[0]) * u.h_min;
      break;
  }
  if (rate_override > 0.0) pb.delta = rate_override;
  return pb;
}

/// Delta used by the route's inequality and envelope.
inline double route_delta(const CtProblem& pb, double sigma) {
  return pb.route == CtRoute::remark3 ? scalar_delta(pb.uncertainty, pb.gains, pb.dither, sigma)
                                      : compute_deltas_ct(pb.uncertainty, pb.gains, pb.dither, sigma).D;
}

/// Returns (gap, slope) so that the route inequality reads eps * slope < gap.
inline std::pair<double, double> ct_inequality(const CtProblem& pb, double sigma0, double sigma) {
  const double dl = pb.delta;
  if (pb.route == CtRoute::remark3) {
    const double a = std::abs(pb.dither.amplitudes[0]);
    const double D = scalar_delta(pb.uncertainty, pb.gains, pb.dither, sigma);
    return {sigma - sigma0, D * (7.0 * a + 2.0 * sigma) / (2.0 * a)};
  }
  const Deltas ds = compute_deltas_ct(pb.uncertainty, pb.gains, pb.dither, sigma);
  if (pb.route == CtRoute::corollary1) return {sigma - sigma0, ds.D * (ds.sum() + 2.0 * dl) / dl};
  const double sp = std::sqrt(pb.p);
  return {sigma - sp * sigma0, sp * ds.D * (2.0 * ds.sum() + 3.0 * dl) / (2.0 * dl) + ds.D / 2.0};
}

inline bool ct_inequality_holds(const CtProblem& pb, double sigma0, double sigma, double epsilon) {
  const auto [gap, slope] = ct_inequality(pb, sigma0, sigma);
  return epsilon * slope < gap;
}

inline double ct_epsilon_star(const CtProblem& pb, double sigma0, double sigma) {
  if (!(sigma > sigma0 && sigma0 > 0.0)) throw ConfigError("need sigma > sigma0 > 0");
  if (pb.route == CtRoute::theorem1 && !(sigma * sigma > pb.p * sigma0 * sigma0))
    throw InfeasibleError("sigma^2 <= p sigma0^2");
  const auto [gap, slope] = ct_inequality(pb, sigma0, sigma);
  return linear_boundary(gap, slope);
}

inline double ct_ball(const CtProblem& pb, double sigma, double epsilon) {
  if (pb.route == CtRoute::remark3) {
    const double a = std::abs(pb.dither.amplitudes[0]);
    return epsilon * scalar_delta(pb.uncertainty, pb.gains, pb.dither, sigma) * (2.0 * a + sigma) / a;
  }
  const Deltas ds = compute_deltas_ct(pb.uncertainty, pb.gains, pb.dither, sigma);
  const double sp = pb.route == CtRoute::theorem1 ? std::sqrt(pb.p) : 1.0;
  return epsilon * ds.D * (2.0 * ds.sum() * sp + pb.delta) / (2.0 * pb.delta);
}

inline double epsilon_star_theorem1(const UncertaintyModel& u, const GainSpec& g, const DitherSpec& d,
                                    double sigma0, double sigma, const LmiCertificate& lmi) {
  return ct_epsilon_star(make_ct_problem(CtRoute::theorem1, u, g, d, 0.0, lmi), sigma0, sigma);
}

struct EpsilonAndRate {
  double epsilon_star = 0.0;
  double rate = 0.0;
};

inline EpsilonAndRate epsilon_star_corollary1(const UncertaintyModel& u, const GainSpec& g,
                                              const DitherSpec& d, double sigma0, double sigma,
                                              double delta_override = 0.0) {
  const CtProblem pb = make_ct_problem(CtRoute::corollary1, u, g, d, delta_override);
  return {ct_epsilon_star(pb, sigma0, sigma), pb.delta};
}

inline EpsilonAndRate epsilon_star_remark3(const UncertaintyModel& u, const GainSpec& g,
                                           const DitherSpec& d, double sigma0, double sigma) {
  const CtProblem pb = make_ct_problem(CtRoute::remark3, u, g, d);
  return {ct_epsilon_star(pb, sigma0, sigma), pb.delta};
}

inline UltimateBound ultimate_bound_ct(const CtProblem& pb, double sigma0, double sigma,
                                       double epsilon, double beta_frac = 0.1) {
  return iterate_ultimate_bound(
      [&](double s0, double s) { return ct_inequality_holds(pb, s0, s, epsilon); },
      [&](double s) { return ct_ball(pb, s, epsilon); }, sigma0, sigma, beta_frac);
}

struct CtCertificate {
  CtProblem problem;
  double sigma0 = 0.0;
  double sigma = 0.0;
  double epsilon_star = 0.0;
  double epsilon = 0.0;  ///< operating epsilon used for the bounds
  Deltas deltas;         ///< at sigma; D is the route's Delta
  double ball = 0.0;     ///< ball radius at sigma and epsilon
  UltimateBound bound;

  [[nodiscard]] CtRoute route() const { return problem.route; }
  [[nodiscard]] double delta() const { return problem.delta; }
  [[nodiscard]] double p() const { return problem.p; }
  [[nodiscard]] double ub() const { return bound.ub; }
};

/// epsilon <= 0 operates at epsilon*.
inline CtCertificate certify_ct(const CtProblem& pb, double sigma0, double sigma, double epsilon = 0.0,
                                double beta_frac = 0.1) {
  CtCertificate c{pb, sigma0, sigma, ct_epsilon_star(pb, sigma0, sigma), 0.0, {}, 0.0, {}};
  c.epsilon = epsilon > 0.0 ? epsilon : c.epsilon_star;
  if (c.epsilon > c.epsilon_star) throw InfeasibleError("operating epsilon exceeds epsilon*");
  c.deltas = compute_deltas_ct(pb.uncertainty, pb.gains, pb.dither, sigma);
  c.deltas.D = route_delta(pb, sigma);
  c.ball = ct_ball(pb, sigma, c.epsilon);
  c.bound = ultimate_bound_ct(pb, sigma0, sigma, c.epsilon, beta_frac);
  return c;
}

/// Bound on |theta~(t)| for an initial error of norm e0 at the certificate's
/// sigma and operating epsilon.
inline double envelope_ct(const CtCertificate& c, double e0, double t) {
  const CtProblem& pb = c.problem;
  const double eps = c.epsilon;
  const double D = c.deltas.D;
  if (t <= eps) return e0 + eps * D;
  const double sp = pb.route == CtRoute::theorem1 ? std::sqrt(pb.p) : 1.0;
  return sp * std::exp(-pb.delta * (t - eps)) * (e0 + 1.5 * eps * D) + c.ball;
}

}  // namespace esc
