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

struct CtSimConfig {
  QuadraticMap map;
  DitherSpec dither;
  GainSpec gains;
  Vector theta_hat0;
  double t_end = 0.0;
  double step = 0.0;  ///< 0 selects epsilon / 256
  /// Optional scalar Hessian h(t) replacing map.hessian (n = 1 only).
  std::function<double(double)> hessian_of_t;

  [[nodiscard]] double h() const { return step > 0.0 ? step : dither.epsilon / 256.0; }
};

inline void validate(const CtSimConfig& c) {
  validate(c.dither);
  if (c.dither.base != TimeBase::continuous) throw ConfigError("continuous simulation needs a continuous dither");
  const std::size_t n = c.map.dim();
  if (c.dither.dim() != n || c.gains.dim() != n || c.theta_hat0.size() != n)
    throw DimensionError("simulation inputs differ in dimension");
  for (double k : c.gains.gains)
    if (!(k < 0.0)) throw ConfigError("gains must be strictly negative");
  if (!(c.h() > 0.0) || c.h() > c.dither.epsilon / 64.0 * (1.0 + 1e-12))
    throw ConfigError("step must satisfy 0 < h <= epsilon / 64");
  if (!(c.t_end >= c.dither.epsilon)) throw ConfigError("t_end must be >= epsilon");
  if (c.hessian_of_t && n != 1) throw ConfigError("time-varying Hessian hook is scalar only");
}

inline std::size_t step_count(double span, double h) {
  const double r = span / h;
  const double near = std::round(r);
  return static_cast<std::size_t>(std::abs(r - near) < 1e-9 * std::max(1.0, r) ? near : std::ceil(r));
}

namespace detail {

/// Evaluates K M(t) y(t) into preallocated buffers; sines are computed once
/// per distinct stage time and reused.
class CtRhs {
public:
  explicit CtRhs(const CtSimConfig& c)
      : c_(c), n_(c.map.dim()), sin_(n_), d_(n_), coef_(n_) {
    for (std::size_t i = 0; i < n_; ++i) coef_[i] = c.gains.gains[i] * 2.0 / c.dither.amplitudes[i];
  }

  void set_time(double t) {
    for (std::size_t i = 0; i < n_; ++i) sin_[i] = c_.dither.sine(i, t);
    h_scalar_ = c_.hessian_of_t ? c_.hessian_of_t(t) : 0.0;
  }

  /// Returns y and writes the derivative into out.
  double eval(const Vector& theta_hat, Vector& out) {
    const Matrix& h = c_.map.hessian;
    for (std::size_t i = 0; i < n_; ++i)
      d_[i] = theta_hat[i] + c_.dither.amplitudes[i] * sin_[i] - c_.map.theta_star[i];
    double quad = 0.0;
    if (c_.hessian_of_t) {
      quad = h_scalar_ * d_[0] * d_[0];
    } else {
      for (std::size_t i = 0; i < n_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_; ++j) row += h(i, j) * d_[j];
        quad += d_[i] * row;
      }
    }
    const double y = c_.map.q_star + 0.5 * quad;
    for (std::size_t i = 0; i < n_; ++i) out[i] = coef_[i] * sin_[i] * y;
    return y;
  }

private:
  const CtSimConfig& c_;
  std::size_t n_;
  Vector sin_, d_, coef_;
  double h_scalar_ = 0.0;
};

}  // namespace detail

/// Sample handed to observers at each grid point.
struct CtSample {
  std::size_t index;
  double t;
  const Vector& theta_hat;
  const Vector& theta_tilde;
  double y;
  const Vector& theta_tilde_dot;
};

/// Fixed-step classical RK4 over [0, t_end]; calls obs(const CtSample&) at
/// every grid point including t = 0.
template <class Observer>
void integrate_ct(const CtSimConfig& c, Observer&& obs) {
  validate(c);
  const double h = c.h();
  const std::size_t steps = step_count(c.t_end, h);
  detail::CtRhs f(c);
  Vector x = c.theta_hat0;
  const std::size_t n = x.size();
  Vector tilde(n), tmp(n), k1(n), k2(n), k3(n), k4(n);
  f.set_time(0.0);
  for (std::size_t m = 0;; ++m) {
    const double t = static_cast<double>(m) * h;
    const double y = f.eval(x, k1);
    for (std::size_t i = 0; i < n; ++i) {
      tilde[i] = x[i] - c.map.theta_star[i];
      if (!std::isfinite(x[i]) || !std::isfinite(k1[i]))
        throw NonFiniteStateError("non-finite state at step " + std::to_string(m),
                                  static_cast<long long>(m));
    }
    obs(CtSample{m, t, x, tilde, y, k1});
    if (m == steps) break;
    f.set_time(t + 0.5 * h);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    f.eval(tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    f.eval(tmp, k3);
    f.set_time(static_cast<double>(m + 1) * h);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    f.eval(tmp, k4);
    for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
}

struct CtDiagnostics {
  std::size_t first_index = 0;  ///< grid index of the first diagnostic row
  std::vector<Vector> G, Y1, Y2, z;
};

struct Trajectory {
  double step = 0.0;
  std::vector<double> times;
  std::vector<Vector> theta_hat;
  std::vector<Vector> theta_tilde;
  std::vector<double> y;
  std::vector<Vector> theta_tilde_dot;
  std::optional<CtDiagnostics> diagnostics;

  [[nodiscard]] std::size_t size() const { return times.size(); }
};

inline Trajectory simulate_ct(const CtSimConfig& c) {
  Trajectory tr;
  tr.step = c.h();
  const std::size_t cap = step_count(c.t_end, tr.step) + 1;
  tr.times.reserve(cap);
  tr.theta_hat.reserve(cap);
  tr.theta_tilde.reserve(cap);
  tr.y.reserve(cap);
  tr.theta_tilde_dot.reserve(cap);
  integrate_ct(c, [&](const CtSample& s) {
    tr.times.push_back(s.t);
    tr.theta_hat.push_back(s.theta_hat);
    tr.theta_tilde.push_back(s.theta_tilde);
    tr.y.push_back(s.y);
    tr.theta_tilde_dot.push_back(s.theta_tilde_dot);
  });
  return tr;
}

/// Fills traj.diagnostics with G, Y1, Y2 and z for every grid point t >= epsilon
/// using composite trapezoid rules over the stored derivative samples.
inline void compute_transformation_ct(Trajectory& tr, const DitherSpec& d, const GainSpec& g,
                                      const QuadraticMap& map) {
  const double h = tr.step;
  const double ratio = d.epsilon / h;
  const auto w = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(w)) > 1e-6 || w < 2)
    throw ConfigError("epsilon must be an integer multiple of the step");
  if (tr.size() <= w) throw InsufficientHistoryError("trajectory shorter than one dither period");
  const std::size_t n = map.dim();
  const std::size_t count = tr.size();
  const double inv_eps = 1.0 / d.epsilon;

  // Running trapezoid integrals from 0: c1 = int theta~^T H theta~', c2 = int H theta~'.
  std::vector<double> c1(count, 0.0);
  std::vector<Vector> c2(count, Vector(n, 0.0));
  std::vector<double> q(count);
  std::vector<Vector> hd(count);
  for (std::size_t m = 0; m < count; ++m) {
    hd[m] = map.hessian * tr.theta_tilde_dot[m];
    q[m] = dot(tr.theta_tilde[m], hd[m]);
    if (m == 0) continue;
    c1[m] = c1[m - 1] + 0.5 * h * (q[m - 1] + q[m]);
    for (std::size_t i = 0; i < n; ++i) c2[m][i] = c2[m - 1][i] + 0.5 * h * (hd[m - 1][i] + hd[m][i]);
  }
  std::vector<Vector> km(count);
  std::vector<Vector> s(count);
  for (std::size_t m = 0; m < count; ++m) {
    km[m] = dither_m(d, tr.times[m]);
    for (std::size_t i = 0; i < n; ++i) km[m][i] *= g.gains[i];
    s[m] = dither_s(d, tr.times[m]);
  }

  CtDiagnostics diag;
  diag.first_index = w;
  for (std::size_t m = w; m < count; ++m) {
    Vector gv(n, 0.0), y1(n, 0.0), y2(n, 0.0);
    for (std::size_t idx = m - w; idx <= m; ++idx) {
      const double wt = (idx == m - w || idx == m) ? 0.5 * h : h;
      const double lever = static_cast<double>(idx - (m - w)) * h;
      const double inner1 = c1[m] - c1[idx];
      double inner2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) inner2 += s[idx][i] * (c2[m][i] - c2[idx][i]);
      for (std::size_t i = 0; i < n; ++i) {
        gv[i] += wt * lever * tr.theta_tilde_dot[idx][i];
        y1[i] += wt * km[idx][i] * inner1;
        y2[i] += wt * km[idx][i] * inner2;
      }
    }
    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) {
      gv[i] *= inv_eps;
      y1[i] *= inv_eps;
      y2[i] *= inv_eps;
      z[i] = tr.theta_tilde[m][i] - gv[i];
    }
    diag.G.push_back(std::move(gv));
    diag.Y1.push_back(std::move(y1));
    diag.Y2.push_back(std::move(y2));
    diag.z.push_back(std::move(z));
  }
  tr.diagnostics = std::move(diag);
}

struct ResidualSeries {
  std::vector<double> times;
  std::vector<double> norms;

  [[nodiscard]] double max() const {
    double m = 0.0;
    for (double v : norms) m = std::max(m, v);
    return m;
  }
};

/// |dz/dt - [K H z + K H G - Y1 - Y2]| with dz/dt by central differences, on
/// grid points t in [t_from, last - h] (t_from defaults to 2 epsilon).
inline ResidualSeries residual_ct(const Trajectory& tr, const GainSpec& g, const QuadraticMap& map,
                                  double t_from = -1.0) {
  if (!tr.diagnostics) throw InsufficientHistoryError("transformation diagnostics missing");
  const CtDiagnostics& dg = *tr.diagnostics;
  const double h = tr.step;
  const Matrix kh = g.matrix() * map.hessian;
  if (t_from < 0.0) t_from = 2.0 * static_cast<double>(dg.first_index) * h;
  ResidualSeries out;
  const std::size_t n = map.dim();
  for (std::size_t r = 1; r + 1 < dg.z.size(); ++r) {
    const std::size_t m = dg.first_index + r;
    if (tr.times[m] < t_from - 1e-12 * h) continue;
    Vector zg(n);
    for (std::size_t i = 0; i < n; ++i) zg[i] = dg.z[r][i] + dg.G[r][i];
    const Vector khzg = kh * zg;
    Vector res(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double zdot = (dg.z[r + 1][i] - dg.z[r - 1][i]) / (2.0 * h);
      res[i] = zdot - (khzg[i] - dg.Y1[r][i] - dg.Y2[r][i]);
    }
    out.times.push_back(tr.times[m]);
    out.norms.push_back(norm2(res));
  }
  return out;
}

}  // namespace esc
