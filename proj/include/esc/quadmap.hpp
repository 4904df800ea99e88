#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "esc/errors.hpp"
#include "esc/linalg.hpp"

namespace esc {

inline constexpr std::size_t kMaxDimension = 16;

inline void require_dimension(std::size_t n) {
  if (n == 0 || n > kMaxDimension)
    throw DimensionError("dimension must be in [1, 16], got " + std::to_string(n));
}

/// Returns (h + h^T)/2. Asymmetry above 1e-9 is reported through warn().
inline Matrix symmetrized(const Matrix& h, const std::string& what) {
  if (!h.is_square()) throw DimensionError(what + " must be square");
  if (asymmetry(h) > 1e-9) warn(what + " is not symmetric; using (H + H^T)/2");
  return symmetric_part(h);
}

struct QuadraticMap {
  double q_star = 0.0;
  Vector theta_star;
  Matrix hessian;

  [[nodiscard]] std::size_t dim() const { return theta_star.size(); }
};

inline QuadraticMap make_quadratic_map(double q_star, Vector theta_star, const Matrix& hessian) {
  require_dimension(theta_star.size());
  if (!std::isfinite(q_star)) throw ConfigError("Q* must be finite");
  if (hessian.rows() != theta_star.size())
    throw DimensionError("Hessian size does not match theta*");
  QuadraticMap m{q_star, std::move(theta_star), symmetrized(hessian, "Hessian")};
  if (!is_positive_definite(m.hessian)) throw NotPositiveDefiniteError("Hessian is not positive definite");
  return m;
}

/// Q* + (theta - theta*)^T H (theta - theta*) / 2
inline double evaluate_map(const QuadraticMap& map, std::span<const double> theta) {
  if (theta.size() != map.dim()) throw DimensionError("theta has wrong dimension");
  const Vector d = subtract(theta, map.theta_star);
  return map.q_star + 0.5 * quadratic_form(d, map.hessian, d);
}

struct UncertaintyModel {
  double q_star_max = 0.0;  ///< |Q*| <= q_star_max
  Matrix hessian_nominal;   ///< H = hessian_nominal + dH, ||dH|| <= kappa
  double kappa = 0.0;
  double h_min = 0.0;  ///< lower bound on the Hessian spectrum
  double h_max = 0.0;  ///< ||H|| <= h_max
  double sigma0 = 1.0;
  bool diagonal = false;  ///< Hessian known to be diagonal

  [[nodiscard]] std::size_t dim() const { return hessian_nominal.rows(); }
};

inline void validate(const UncertaintyModel& u) {
  require_dimension(u.dim());
  if (!(u.q_star_max >= 0.0)) throw ConfigError("q_star_max must be >= 0");
  if (!(u.kappa >= 0.0)) throw ConfigError("kappa must be >= 0");
  if (!(u.h_min > 0.0)) throw ConfigError("h_min must be > 0");
  if (!(u.h_max >= u.h_min)) throw ConfigError("h_max must be >= h_min");
  if (!(u.sigma0 > 0.0)) throw ConfigError("sigma0 must be > 0");
  if (asymmetry(u.hessian_nominal) > 1e-12) throw NotSymmetricError("nominal Hessian is not symmetric");
  if (!is_positive_definite(u.hessian_nominal))
    throw NotPositiveDefiniteError("nominal Hessian is not positive definite");
  if (u.h_min > spectral_norm(u.hessian_nominal) + u.kappa)
    throw ConfigError("h_min exceeds ||H_nominal|| + kappa");
  if (u.diagonal && !is_diagonal(u.hessian_nominal))
    throw ConfigError("diagonal declaration with a non-diagonal nominal Hessian");
}

/// Uncertainty set for a Hessian known to lie in [h_lo, h_hi] * I (n = 1 or
/// diagonal). The nominal point is the midpoint, kappa the half-width.
inline UncertaintyModel interval_uncertainty(std::size_t n, double q_star_max, double h_lo,
                                             double h_hi, double sigma0) {
  UncertaintyModel u;
  u.q_star_max = q_star_max;
  u.hessian_nominal = Matrix::identity(n) * (0.5 * (h_lo + h_hi));
  u.kappa = 0.5 * (h_hi - h_lo);
  u.h_min = h_lo;
  u.h_max = h_hi;
  u.sigma0 = sigma0;
  u.diagonal = true;
  return u;
}

enum class TimeBase { continuous, discrete };

struct DitherSpec {
  TimeBase base = TimeBase::continuous;
  Vector amplitudes;
  std::vector<int> freq_indices;  ///< l_i (continuous) or alpha_i (discrete)
  double epsilon = 0.0;           ///< continuous period
  int period = 0;                 ///< discrete period T

  [[nodiscard]] std::size_t dim() const { return amplitudes.size(); }

  [[nodiscard]] double omega(std::size_t i) const {
    const double two_pi = 2.0 * std::numbers::pi;
    return base == TimeBase::continuous ? two_pi * freq_indices[i] / epsilon
                                        : two_pi * freq_indices[i] / period;
  }

  /// sin(omega_i t), with the phase reduced exactly before evaluation so long
  /// horizons keep full accuracy.
  [[nodiscard]] double sine(std::size_t i, double t) const {
    const double two_pi = 2.0 * std::numbers::pi;
    if (base == TimeBase::discrete) {
      const auto k = static_cast<std::int64_t>(std::llround(t));
      std::int64_t m = (static_cast<std::int64_t>(freq_indices[i]) * k) % period;
      if (m < 0) m += period;
      return std::sin(two_pi * static_cast<double>(m) / period);
    }
    const double cycles = freq_indices[i] * (t / epsilon);
    return std::sin(two_pi * (cycles - std::floor(cycles)));
  }
};

inline void validate(const DitherSpec& d) {
  require_dimension(d.dim());
  if (d.freq_indices.size() != d.dim())
    throw DimensionError("amplitudes and frequency indices differ in length");
  for (double a : d.amplitudes)
    if (a == 0.0 || !std::isfinite(a)) throw ConfigError("dither amplitudes must be nonzero and finite");
  if (std::set<int>(d.freq_indices.begin(), d.freq_indices.end()).size() != d.dim())
    throw ConfigError("frequency indices must be pairwise distinct");
  if (d.base == TimeBase::continuous) {
    if (!(d.epsilon > 0.0) || !std::isfinite(d.epsilon)) throw ConfigError("epsilon must be > 0");
    for (int l : d.freq_indices)
      if (l <= 0) throw ConfigError("continuous frequency indices must be positive");
    return;
  }
  if (d.period < 2) throw ConfigError("discrete period T must be >= 2");
  for (int al : d.freq_indices) {
    if (al == 0) throw ConfigError("discrete frequency indices must be nonzero");
    const long twice = 2L * std::abs(static_cast<long>(al));
    if (twice > d.period) throw ConfigError("discrete frequency must satisfy |2 alpha / T| < 1");
    if (twice == d.period)
      warn_once("|2 alpha / T| = 1: the dither sin(pi k) vanishes on the integer grid");
  }
}

inline DitherSpec continuous_dither(Vector amplitudes, std::vector<int> l, double epsilon) {
  DitherSpec d{TimeBase::continuous, std::move(amplitudes), std::move(l), epsilon, 0};
  validate(d);
  return d;
}

/// Default indices l_i = i.
inline DitherSpec continuous_dither(Vector amplitudes, double epsilon) {
  std::vector<int> l(amplitudes.size());
  for (std::size_t i = 0; i < l.size(); ++i) l[i] = static_cast<int>(i) + 1;
  return continuous_dither(std::move(amplitudes), std::move(l), epsilon);
}

inline DitherSpec discrete_dither(Vector amplitudes, std::vector<int> alpha, int period) {
  DitherSpec d{TimeBase::discrete, std::move(amplitudes), std::move(alpha), 0.0, period};
  validate(d);
  return d;
}

/// Default indices alpha_i = i; needs T > 2n.
inline DitherSpec discrete_dither(Vector amplitudes, int period) {
  std::vector<int> al(amplitudes.size());
  for (std::size_t i = 0; i < al.size(); ++i) al[i] = static_cast<int>(i) + 1;
  return discrete_dither(std::move(amplitudes), std::move(al), period);
}

inline Vector dither_s(const DitherSpec& d, double t) {
  Vector s(d.dim());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = d.amplitudes[i] * d.sine(i, t);
  return s;
}

inline Vector dither_m(const DitherSpec& d, double t) {
  Vector m(d.dim());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (d.amplitudes[i] == 0.0) throw ConfigError("zero dither amplitude");
    m[i] = 2.0 / d.amplitudes[i] * d.sine(i, t);
  }
  return m;
}

struct GainSpec {
  Vector gains;  ///< diagonal of K (continuous) or L (discrete)

  [[nodiscard]] std::size_t dim() const { return gains.size(); }
  [[nodiscard]] Matrix matrix() const { return Matrix::diagonal(gains); }
  [[nodiscard]] double max_abs() const {
    double m = 0.0;
    for (double g : gains) m = std::max(m, std::abs(g));
    return m;
  }
  [[nodiscard]] double min_abs() const {
    double m = std::abs(gains.at(0));
    for (double g : gains) m = std::min(m, std::abs(g));
    return m;
  }
  [[nodiscard]] bool uniform() const {
    return std::all_of(gains.begin(), gains.end(), [&](double g) { return g == gains[0]; });
  }
};

/// Eigenvalues of G*H for diagonal G < 0 and symmetric H > 0. G*H is similar
/// to -D H D with D = sqrt|G|, so the spectrum is real.
inline Vector gain_hessian_eigenvalues(const GainSpec& g, const Matrix& h) {
  const std::size_t n = g.dim();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = -std::sqrt(std::abs(g.gains[i]) * std::abs(g.gains[j])) * h(i, j);
  return jacobi_eigen(m).values;
}

inline void validate(const GainSpec& g, const Matrix& hessian_nominal) {
  require_dimension(g.dim());
  if (hessian_nominal.rows() != g.dim()) throw DimensionError("gain and Hessian dimensions differ");
  for (double k : g.gains)
    if (!(k < 0.0) || !std::isfinite(k)) throw ConfigError("gains must be strictly negative");
  if (gain_hessian_eigenvalues(g, hessian_nominal).back() >= 0.0)
    throw NotHurwitzError("gain times nominal Hessian is not Hurwitz");
}

/// Period-averaged deviations of the dither identities, maximized over
/// window offsets:
///   mean:   |avg S_i| / a_i
///   demod:  |avg M S^T - I|
///   triple: |avg sin_i sin_j sin_m| over all index triples
struct DitherIdentityReport {
  double mean = 0.0;
  double demod = 0.0;
  double triple = 0.0;
  std::size_t samples = 0;

  [[nodiscard]] double worst() const { return std::max({mean, demod, triple}); }
};

inline DitherIdentityReport dither_identities(const DitherSpec& d, std::size_t points = 4096) {
  validate(d);
  const std::size_t n = d.dim();
  std::vector<double> starts;
  std::size_t count = 0;
  double dt = 1.0;
  if (d.base == TimeBase::continuous) {
    // Rectangle rule on a periodic integrand equals the composite trapezoid.
    count = points;
    dt = d.epsilon / static_cast<double>(points);
    starts = {0.0, 0.3716 * d.epsilon, 2.5 * d.epsilon};
  } else {
    count = static_cast<std::size_t>(d.period);
    for (int k0 = 0; k0 < d.period; ++k0) starts.push_back(k0);
  }

  DitherIdentityReport r;
  r.samples = count;
  const double inv = 1.0 / static_cast<double>(count);
  for (double t0 : starts) {
    Vector mean(n, 0.0);
    Matrix demod(n, n);
    std::vector<double> triple(n * n * n, 0.0);
    for (std::size_t m = 0; m < count; ++m) {
      const double t = t0 + static_cast<double>(m) * dt;
      Vector s(n);
      for (std::size_t i = 0; i < n; ++i) s[i] = d.sine(i, t);
      for (std::size_t i = 0; i < n; ++i) {
        mean[i] += s[i];
        for (std::size_t j = 0; j < n; ++j) {
          demod(i, j) += 2.0 * d.amplitudes[j] / d.amplitudes[i] * s[i] * s[j];
          for (std::size_t k = 0; k < n; ++k) triple[(i * n + j) * n + k] += s[i] * s[j] * s[k];
        }
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      r.mean = std::max(r.mean, std::abs(mean[i] * inv));
      for (std::size_t j = 0; j < n; ++j)
        r.demod = std::max(r.demod, std::abs(demod(i, j) * inv - (i == j ? 1.0 : 0.0)));
    }
    for (double v : triple) r.triple = std::max(r.triple, std::abs(v * inv));
  }
  return r;
}

}  // namespace esc
