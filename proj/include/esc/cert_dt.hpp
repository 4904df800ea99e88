#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "esc/cert_common.hpp"
#include "esc/cert_ct.hpp"
#include "esc/errors.hpp"
#include "esc/lmi.hpp"
#include "esc/quadmap.hpp"

namespace esc {

enum class DtRoute { theorem2, corollary2, scalar };

inline const char* to_string(DtRoute r) {
  switch (r) {
    case DtRoute::theorem2: return "theorem2";
    case DtRoute::corollary2: return "corollary2";
    case DtRoute::scalar: return "scalar";
  }
  return "?";
}

inline Deltas compute_deltas_dt(const UncertaintyModel& u, const GainSpec& g, const DitherSpec& d,
                                double sigma, int T) {
  if (T < 2) throw ConfigError("T must be >= 2");
  return compute_deltas(u, g, d, sigma, static_cast<double>(T - 1));
}

struct DtProblem {
  DtRoute route = DtRoute::corollary2;
  UncertaintyModel uncertainty;
  GainSpec gains;
  DitherSpec dither;
  double lambda = 0.0;
  double p = 1.0;
  std::optional<LmiCertificate> lmi;

  [[nodiscard]] int T() const { return dither.period; }
};

/// A positive rate_override replaces the derived lambda. theorem2 needs an
/// LMI certificate (searched at epsilon_hint when absent).
inline DtProblem make_dt_problem(DtRoute route, const UncertaintyModel& u, const GainSpec& g,
                                 const DitherSpec& d, double rate_override = 0.0,
                                 std::optional<LmiCertificate> lmi = std::nullopt,
                                 double epsilon_hint = 0.0) {
  validate(u);
  validate(g, u.hessian_nominal);
  validate(d);
  if (d.base != TimeBase::discrete) throw ConfigError("discrete route needs a discrete dither");
  if (d.dim() != u.dim()) throw DimensionError("dither and uncertainty dimensions differ");
  DtProblem pb{route, u, g, d, 0.0, 1.0, std::nullopt};
  switch (route) {
    case DtRoute::theorem2:
      if (!lmi) lmi = search_certificate(u, g, Mode::dt, epsilon_hint);
      if (lmi->mode != Mode::dt) throw ConfigError("discrete route needs a discrete LMI certificate");
      pb.lambda = lmi->rate;
      pb.p = lmi->p;
      pb.lmi = lmi;
      break;
    case DtRoute::corollary2:
      if (!diagonal_route_allowed(u, g))
        throw ConfigError("diagonal route needs a diagonal Hessian declaration or uniform gains");
      pb.lambda = u.h_min * g.min_abs();
      break;
    case DtRoute::scalar:
      if (u.dim() != 1) throw ConfigError("scalar route requires n = 1");
      pb.lambda = std::abs(g.gains[0]) * u.h_min;
      break;
  }
  if (rate_override > 0.0) pb.lambda = rate_override;
  return pb;
}

inline double route_delta(const DtProblem& pb, double sigma) {
  return pb.route == DtRoute::scalar
             ? scalar_delta(pb.uncertainty, pb.gains, pb.dither, sigma)
             : compute_deltas_dt(pb.uncertainty, pb.gains, pb.dither, sigma, pb.T()).D;
}

/// (gap, slope) with the route inequality reading eps * slope < gap.
inline std::pair<double, double> dt_inequality(const DtProblem& pb, double sigma0, double sigma) {
  const double w = pb.T() - 1;
  const double lam = pb.lambda;
  if (pb.route == DtRoute::scalar) {
    const double a = std::abs(pb.dither.amplitudes[0]);
    const double D = scalar_delta(pb.uncertainty, pb.gains, pb.dither, sigma);
    return {sigma - sigma0, D * w * (7.0 * a + 2.0 * sigma) / (2.0 * a)};
  }
  const Deltas ds = compute_deltas_dt(pb.uncertainty, pb.gains, pb.dither, sigma, pb.T());
  if (pb.route == DtRoute::corollary2) return {sigma - sigma0, ds.D * (ds.sum() + 2.0 * w * lam) / lam};
  const double sp = std::sqrt(pb.p);
  return {sigma - sp * sigma0, sp * ds.D * (3.0 * w * lam + 2.0 * ds.sum()) / (2.0 * lam) + w * ds.D / 2.0};
}

inline double rate_limit(double lambda) { return (1.0 - 1e-9) / lambda; }

inline bool dt_inequality_holds(const DtProblem& pb, double sigma0, double sigma, double epsilon) {
  const auto [gap, slope] = dt_inequality(pb, sigma0, sigma);
  return epsilon * slope < gap && pb.lambda * epsilon < 1.0;
}

/// Largest epsilon for which the fixed (P, lambda) LMI stays feasible with
/// zeta re-optimized, searched by bisection on [0, hi].
inline double lmi_epsilon_bound(const LmiCertificate& c, const UncertaintyModel& u, const GainSpec& g,
                                double hi) {
  auto ok = [&](double e) {
    return best_zeta_for(Mode::dt, c.p_norm, c.rate, e, u, g).margin > kMarginTol;
  };
  if (ok(hi)) return hi;
  double lo = 0.0;
  if (!ok(lo)) throw InfeasibleError("LMI infeasible at epsilon = 0");
  while (hi - lo > 1e-12 + 1e-10 * hi) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

inline double dt_epsilon_star(const DtProblem& pb, double sigma0, double sigma) {
  if (!(sigma > sigma0 && sigma0 > 0.0)) throw ConfigError("need sigma > sigma0 > 0");
  if (pb.route == DtRoute::theorem2 && !(sigma * sigma > pb.p * sigma0 * sigma0))
    throw InfeasibleError("sigma^2 <= p sigma0^2");
  const auto [gap, slope] = dt_inequality(pb, sigma0, sigma);
  double eps = std::min(linear_boundary(gap, slope), rate_limit(pb.lambda));
  if (pb.route == DtRoute::theorem2) eps = lmi_epsilon_bound(*pb.lmi, pb.uncertainty, pb.gains, eps);
  return eps;
}

inline double dt_ball(const DtProblem& pb, double sigma, double epsilon) {
  const double w = pb.T() - 1;
  if (pb.route == DtRoute::scalar) {
    const double a = std::abs(pb.dither.amplitudes[0]);
    return epsilon * scalar_delta(pb.uncertainty, pb.gains, pb.dither, sigma) * w * (2.0 * a + sigma) / a;
  }
  const Deltas ds = compute_deltas_dt(pb.uncertainty, pb.gains, pb.dither, sigma, pb.T());
  const double sp = pb.route == DtRoute::theorem2 ? std::sqrt(pb.p) : 1.0;
  return epsilon * ds.D * (w / 2.0 + sp * ds.sum() / pb.lambda);
}

inline double epsilon_star_theorem2(const UncertaintyModel& u, const GainSpec& g, const DitherSpec& d,
                                    double sigma0, double sigma, const LmiCertificate& lmi) {
  return dt_epsilon_star(make_dt_problem(DtRoute::theorem2, u, g, d, 0.0, lmi), sigma0, sigma);
}

inline EpsilonAndRate epsilon_star_corollary2(const UncertaintyModel& u, const GainSpec& g,
                                              const DitherSpec& d, double sigma0, double sigma,
                                              double lambda_override = 0.0) {
  const DtProblem pb = make_dt_problem(DtRoute::corollary2, u, g, d, lambda_override);
  return {dt_epsilon_star(pb, sigma0, sigma), pb.lambda};
}

inline EpsilonAndRate epsilon_star_scalar_dt(const UncertaintyModel& u, const GainSpec& g,
                                             const DitherSpec& d, double sigma0, double sigma) {
  const DtProblem pb = make_dt_problem(DtRoute::scalar, u, g, d);
  return {dt_epsilon_star(pb, sigma0, sigma), pb.lambda};
}

inline UltimateBound ultimate_bound_dt(const DtProblem& pb, double sigma0, double sigma, double epsilon,
                                       double beta_frac = 0.1) {
  return iterate_ultimate_bound(
      [&](double s0, double s) { return dt_inequality_holds(pb, s0, s, epsilon); },
      [&](double s) { return dt_ball(pb, s, epsilon); }, sigma0, sigma, beta_frac);
}

struct DtCertificate {
  DtProblem problem;
  double sigma0 = 0.0;
  double sigma = 0.0;
  double epsilon_star = 0.0;
  double epsilon = 0.0;
  Deltas deltas;
  double ball = 0.0;
  UltimateBound bound;

  [[nodiscard]] DtRoute route() const { return problem.route; }
  [[nodiscard]] double lambda() const { return problem.lambda; }
  [[nodiscard]] double p() const { return problem.p; }
  [[nodiscard]] double ub() const { return bound.ub; }
  [[nodiscard]] int T() const { return problem.T(); }
};

inline DtCertificate certify_dt(const DtProblem& pb, double sigma0, double sigma, double epsilon = 0.0,
                                double beta_frac = 0.1) {
  DtCertificate c{pb, sigma0, sigma, dt_epsilon_star(pb, sigma0, sigma), 0.0, {}, 0.0, {}};
  c.epsilon = epsilon > 0.0 ? epsilon : c.epsilon_star;
  if (c.epsilon > c.epsilon_star) throw InfeasibleError("operating epsilon exceeds epsilon*");
  c.deltas = compute_deltas_dt(pb.uncertainty, pb.gains, pb.dither, sigma, pb.T());
  c.deltas.D = route_delta(pb, sigma);
  c.ball = dt_ball(pb, sigma, c.epsilon);
  c.bound = ultimate_bound_dt(pb, sigma0, sigma, c.epsilon, beta_frac);
  return c;
}

inline double envelope_dt(const DtCertificate& c, double e0, long long k) {
  const DtProblem& pb = c.problem;
  const double eps = c.epsilon;
  const double w = pb.T() - 1;
  const double D = c.deltas.D;
  if (k <= pb.T() - 1) return e0 + eps * w * D;
  if (!(pb.lambda * eps < 1.0)) throw ConfigError("lambda * epsilon must be < 1");
  const double sp = pb.route == DtRoute::theorem2 ? std::sqrt(pb.p) : 1.0;
  return sp * std::pow(1.0 - pb.lambda * eps, static_cast<double>(k - pb.T() + 1)) *
             (e0 + 1.5 * w * eps * D) +
         c.ball;
}

}  // namespace esc
