#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "esc/errors.hpp"
#include "esc/linalg.hpp"
#include "esc/quadmap.hpp"

namespace esc {

struct DtSimConfig {
  QuadraticMap map;
  DitherSpec dither;
  GainSpec gains;
  double epsilon = 0.0;
  Vector theta_hat0;
  long long k_end = 0;
  /// Optional scalar Hessian h(k) replacing map.hessian (n = 1 only).
  std::function<double(long long)> hessian_of_k;
};

inline void validate(const DtSimConfig& c) {
  validate(c.dither);
  if (c.dither.base != TimeBase::discrete) throw ConfigError("discrete simulation needs a discrete dither");
  const std::size_t n = c.map.dim();
  if (c.dither.dim() != n || c.gains.dim() != n || c.theta_hat0.size() != n)
    throw DimensionError("simulation inputs differ in dimension");
  for (double l : c.gains.gains)
    if (!(l < 0.0)) throw ConfigError("gains must be strictly negative");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (c.k_end < c.dither.period - 1) throw ConfigError("k_end must be >= T - 1");
  if (c.hessian_of_k && n != 1) throw ConfigError("time-varying Hessian hook is scalar only");
}

struct DtSample {
  long long k;
  const Vector& theta_hat;
  const Vector& theta_tilde;
  double y;
};

/// Runs theta_hat(k+1) = theta_hat(k) + eps L M(k) y(k) for k = 0..k_end-1 and
/// calls obs(const DtSample&) for k = 0..k_end.
template <class Observer>
void iterate_dt(const DtSimConfig& c, Observer&& obs) {
  validate(c);
  const std::size_t n = c.map.dim();
  Vector x = c.theta_hat0;
  Vector tilde(n), d(n);
  for (long long k = 0;; ++k) {
    const Vector s = dither_s(c.dither, static_cast<double>(k));
    for (std::size_t i = 0; i < n; ++i) {
      tilde[i] = x[i] - c.map.theta_star[i];
      d[i] = tilde[i] + s[i];
      if (!std::isfinite(x[i]))
        throw NonFiniteStateError("non-finite state at k = " + std::to_string(k), k);
    }
    const double y = c.hessian_of_k ? c.map.q_star + 0.5 * c.hessian_of_k(k) * d[0] * d[0]
                                    : c.map.q_star + 0.5 * quadratic_form(d, c.map.hessian, d);
    obs(DtSample{k, x, tilde, y});
    if (k == c.k_end) break;
    const Vector m = dither_m(c.dither, static_cast<double>(k));
    for (std::size_t i = 0; i < n; ++i) x[i] += c.epsilon * c.gains.gains[i] * m[i] * y;
  }
}

struct DtDiagnostics {
  long long first_index = 0;  ///< T - 1
  std::vector<Vector> G, Y1, Y2, z;
};

struct DtTrajectory {
  double epsilon = 0.0;
  std::vector<Vector> theta_hat;    ///< k = 0..k_end
  std::vector<Vector> theta_tilde;  ///< k = 0..k_end
  std::vector<Vector> theta_bar;    ///< j = 0..k_end-1
  std::vector<double> y;            ///< k = 0..k_end
  std::optional<DtDiagnostics> diagnostics;

  [[nodiscard]] std::size_t size() const { return theta_hat.size(); }
};

inline DtTrajectory simulate_dt(const DtSimConfig& c) {
  DtTrajectory tr;
  tr.epsilon = c.epsilon;
  iterate_dt(c, [&](const DtSample& s) {
    tr.theta_hat.push_back(s.theta_hat);
    tr.theta_tilde.push_back(s.theta_tilde);
    tr.y.push_back(s.y);
  });
  for (std::size_t j = 0; j + 1 < tr.theta_tilde.size(); ++j)
    tr.theta_bar.push_back(subtract(tr.theta_tilde[j + 1], tr.theta_tilde[j]));
  return tr;
}

/// Exact double sums for G, Y1, Y2 over i = k-T+1..k-1, j = i..k-1, and
/// z = theta~ - G, for every k >= T - 1 with a full history.
inline void compute_transformation_dt(DtTrajectory& tr, const DitherSpec& d, const GainSpec& g,
                                      const QuadraticMap& map) {
  const long long T = d.period;
  const long long last = static_cast<long long>(tr.size()) - 1;
  if (last < T - 1) throw InsufficientHistoryError("trajectory shorter than T");
  const std::size_t n = map.dim();
  const double invT = 1.0 / static_cast<double>(T);

  DtDiagnostics diag;
  diag.first_index = T - 1;
  for (long long k = T - 1; k <= last; ++k) {
    Vector gv(n, 0.0), y1(n, 0.0), y2(n, 0.0);
    for (long long i = k - T + 1; i <= k - 1; ++i) {
      const Vector lm = [&] {
        Vector v = dither_m(d, static_cast<double>(i));
        for (std::size_t r = 0; r < n; ++r) v[r] *= g.gains[r];
        return v;
      }();
      const Vector s = dither_s(d, static_cast<double>(i));
      Vector sum_tilde(n);
      for (std::size_t r = 0; r < n; ++r) sum_tilde[r] = tr.theta_tilde[k][r] + tr.theta_tilde[i][r];
      for (long long j = i; j <= k - 1; ++j) {
        const Vector& bar = tr.theta_bar[static_cast<std::size_t>(j)];
        const Vector hb = map.hessian * bar;
        const double c1 = dot(sum_tilde, hb);
        const double c2 = dot(s, hb);
        for (std::size_t r = 0; r < n; ++r) {
          gv[r] += bar[r];
          y1[r] += lm[r] * c1;
          y2[r] += lm[r] * c2;
        }
      }
    }
    Vector z(n);
    for (std::size_t r = 0; r < n; ++r) {
      gv[r] *= invT;
      y1[r] *= 0.5 * invT;
      y2[r] *= invT;
      z[r] = tr.theta_tilde[k][r] - gv[r];
    }
    diag.G.push_back(std::move(gv));
    diag.Y1.push_back(std::move(y1));
    diag.Y2.push_back(std::move(y2));
    diag.z.push_back(std::move(z));
  }
  tr.diagnostics = std::move(diag);
}

/// |z(k+1) - [(I + eps L H) z(k) + eps L H G(k) - eps Y1(k) - eps Y2(k)]|
/// for k = T-1..k_end-1.
inline std::vector<double> residual_dt(const DtTrajectory& tr, const GainSpec& g,
                                       const QuadraticMap& map, double epsilon) {
  if (!tr.diagnostics) throw InsufficientHistoryError("transformation diagnostics missing");
  const DtDiagnostics& dg = *tr.diagnostics;
  const std::size_t n = map.dim();
  const Matrix lh = g.matrix() * map.hessian;
  std::vector<double> out;
  for (std::size_t r = 0; r + 1 < dg.z.size(); ++r) {
    const Vector lhz = lh * dg.z[r];
    const Vector lhg = lh * dg.G[r];
    Vector res(n);
    for (std::size_t i = 0; i < n; ++i)
      res[i] = dg.z[r + 1][i] -
               (dg.z[r][i] + epsilon * lhz[i] + epsilon * lhg[i] - epsilon * dg.Y1[r][i] -
                epsilon * dg.Y2[r][i]);
    out.push_back(norm2(res));
  }
  return out;
}

}  // namespace esc
