#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "esc/cert_ct.hpp"
#include "esc/cert_dt.hpp"
#include "esc/errors.hpp"
#include "esc/linalg.hpp"
#include "esc/quadmap.hpp"
#include "esc/sim_ct.hpp"
#include "esc/sim_dt.hpp"

namespace esc {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

/// ES_CERTIFY_SEED when set and numeric, otherwise kDefaultSeed.
inline std::uint64_t default_seed() {
  if (const char* s = std::getenv("ES_CERTIFY_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (end != s && *end == '\0') return v;
    warn("ignoring non-numeric ES_CERTIFY_SEED");
  }
  return kDefaultSeed;
}

/// Boundary of a monotone predicate: f(lo) true, f(hi) false.
template <class Pred>
double bisect_inequality(Pred&& f, double lo, double hi, double tol = 1e-12) {
  if (!(lo < hi)) throw ConfigError("bisection bracket must satisfy lo < hi");
  if (!f(lo) || f(hi)) throw ConfigError("bisection bracket does not straddle the boundary");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct NormSweep {
  double max_ratio = 0.0;
  double at = 0.0;  ///< k or t of the worst ratio
};

/// max over k in 0..count of ||A^k|| / bound(k), evaluated on about
/// `samples` evenly spaced powers.
template <class Bound>
NormSweep norm_power_sweep(const Matrix& a, long long count, Bound&& bound, long long samples = 1000) {
  const long long stride = std::max<long long>(1, count / std::max<long long>(1, samples));
  NormSweep r;
  Matrix pw = Matrix::identity(a.rows());
  for (long long k = 0; k <= count; ++k) {
    if (k % stride == 0 || k == count) {
      const double ratio = spectral_norm(pw) / bound(k);
      if (ratio > r.max_ratio) r = {ratio, static_cast<double>(k)};
    }
    pw = pw * a;
  }
  return r;
}

/// max over the grid of ||exp(A t)|| / bound(t).
template <class Bound>
NormSweep norm_exp_sweep(const Matrix& a, double t_end, Bound&& bound, int points = 400) {
  NormSweep r;
  for (int i = 0; i <= points; ++i) {
    const double t = t_end * i / points;
    const double ratio = spectral_norm(expm(a * t)) / bound(t);
    if (ratio > r.max_ratio) r = {ratio, t};
  }
  return r;
}

// ---------------------------------------------------------------------------
// random draws

/// Uniform point in the ball of the given radius.
inline Vector random_in_ball(std::size_t n, double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  Vector v(n);
  double nv = 0.0;
  do {
    for (double& x : v) x = gauss(rng);
    nv = norm2(v);
  } while (nv == 0.0);
  const double r = radius * std::pow(unit(rng), 1.0 / static_cast<double>(n));
  for (double& x : v) x *= r / nv;
  return v;
}

/// Symmetric Gaussian matrix (diagonal when requested) rescaled to a
/// spectral norm drawn uniformly from [0, kappa].
inline Matrix random_delta_h(std::size_t n, double kappa, bool diagonal, std::mt19937_64& rng) {
  Matrix m(n, n);
  if (kappa <= 0.0) return m;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (diagonal && i != j) continue;
      m(i, j) = m(j, i) = gauss(rng);
    }
  const double nm = spectral_norm(m);
  if (nm == 0.0) return m;
  return m * (kappa * unit(rng) / nm);
}

/// A Hessian from the uncertainty set: nominal + dH with ||dH|| <= kappa and
/// spectrum inside [h_min, h_max]; draws outside the bounds are rejected.
inline Matrix random_hessian(const UncertaintyModel& u, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Matrix h = u.hessian_nominal + random_delta_h(u.dim(), u.kappa, u.diagonal, rng);
    const Vector ev = jacobi_eigen(h).values;
    if (ev.front() >= u.h_min * (1.0 - 1e-12) && ev.back() <= u.h_max * (1.0 + 1e-12)) return h;
  }
  throw ConfigError("uncertainty set admits no Hessian within [h_min, h_max]");
}

/// Random valid dither: distinct indices, amplitudes in [0.05, 1] with
/// random sign. Discrete indices avoid alpha_i = +-alpha_j (mod T) and
/// 2 alpha_i = 0 (mod T) so that the demodulation identity holds.
inline DitherSpec random_dither(TimeBase base, std::size_t n, std::mt19937_64& rng, int max_T = 8) {
  std::uniform_real_distribution<double> amp(0.05, 1.0);
  std::bernoulli_distribution flip;
  Vector a(n);
  for (double& x : a) x = amp(rng) * (flip(rng) ? -1.0 : 1.0);
  if (base == TimeBase::continuous) {
    std::vector<int> pool{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<int> l(pool.begin(), pool.begin() + static_cast<long>(n));
    std::uniform_real_distribution<double> eps(1e-3, 1.0);
    return continuous_dither(std::move(a), std::move(l), eps(rng));
  }
  const int t_min = static_cast<int>(2 * n + 1);
  if (t_min > max_T) throw ConfigError("max_T too small for a valid discrete dither");
  std::uniform_int_distribution<int> tdist(t_min, max_T);
  const int T = tdist(rng);
  std::vector<int> pool;
  for (int al = 1; 2 * al < T; ++al) pool.push_back(al);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::vector<int> al(pool.begin(), pool.begin() + static_cast<long>(n));
  for (int& x : al)
    if (flip(rng)) x = -x;
  return discrete_dither(std::move(a), std::move(al), T);
}

// ---------------------------------------------------------------------------
// envelope sweeps

struct SweepReport {
  std::string digest;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::optional<long long> violating_index;  ///< grid index of the first violation
  std::optional<double> violating_time;
  long long worst_index = -1;
  double worst_time = 0.0;
  int worst_draw = -1;
  long long samples = 0;
  int draws = 0;

  [[nodiscard]] bool passed() const { return worst_margin > 0.0; }
};

inline void record(SweepReport& r, double margin, long long index, double time, int draw) {
  ++r.samples;
  if (margin < r.worst_margin) {
    r.worst_margin = margin;
    r.worst_index = index;
    r.worst_time = time;
    r.worst_draw = draw;
  }
  if (margin <= 0.0 && !r.violating_index) {
    r.violating_index = index;
    r.violating_time = time;
  }
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Runs `draws` continuous simulations with random Q*, Hessian and initial
/// error inside the certificate's sets and records envelope - |theta~| at
/// every grid point. theta_star fixes the extremum location.
inline SweepReport envelope_sweep_ct(const CtCertificate& c, const Vector& theta_star, int draws,
                                     std::uint64_t seed) {
  const CtProblem& pb = c.problem;
  const UncertaintyModel& u = pb.uncertainty;
  const std::size_t n = u.dim();
  SweepReport rep;
  rep.digest = std::string("ct/") + to_string(pb.route) + "/eps=" + format_double(c.epsilon) +
               "/delta=" + format_double(pb.delta) + "/seed=" + std::to_string(seed);
  rep.draws = draws;
  int max_l = 1;
  for (int l : pb.dither.freq_indices) max_l = std::max(max_l, l);
  const double h = c.epsilon / std::max(64.0, 16.0 * max_l);
  for (int draw = 0; draw < draws; ++draw) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(draw));
    std::uniform_real_distribution<double> q(-u.q_star_max, u.q_star_max);
    const double q_star = u.q_star_max > 0.0 ? q(rng) : 0.0;
    const Matrix hess = random_hessian(u, rng);
    const Vector e0 = random_in_ball(n, u.sigma0, rng);
    const double e0n = norm2(e0);
    CtSimConfig cfg{make_quadratic_map(q_star, theta_star, hess), pb.dither, pb.gains,
                    axpy(1.0, e0, theta_star), c.epsilon + 3.0 / pb.delta, h, {}};
    cfg.dither.epsilon = c.epsilon;
    integrate_ct(cfg, [&](const CtSample& s) {
      record(rep, envelope_ct(c, e0n, s.t) - norm2(s.theta_tilde), static_cast<long long>(s.index), s.t,
             draw);
    });
  }
  return rep;
}

inline SweepReport envelope_sweep_dt(const DtCertificate& c, const Vector& theta_star, int draws,
                                     std::uint64_t seed) {
  const DtProblem& pb = c.problem;
  const UncertaintyModel& u = pb.uncertainty;
  const std::size_t n = u.dim();
  SweepReport rep;
  rep.digest = std::string("dt/") + to_string(pb.route) + "/eps=" + format_double(c.epsilon) +
               "/lambda=" + format_double(pb.lambda) + "/T=" + std::to_string(pb.T()) +
               "/seed=" + std::to_string(seed);
  rep.draws = draws;
  const long long k_end =
      pb.T() - 1 + static_cast<long long>(std::ceil(4.0 / (pb.lambda * c.epsilon)));
  for (int draw = 0; draw < draws; ++draw) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(draw));
    std::uniform_real_distribution<double> q(-u.q_star_max, u.q_star_max);
    const double q_star = u.q_star_max > 0.0 ? q(rng) : 0.0;
    const Matrix hess = random_hessian(u, rng);
    const Vector e0 = random_in_ball(n, u.sigma0, rng);
    const double e0n = norm2(e0);
    DtSimConfig cfg{make_quadratic_map(q_star, theta_star, hess), pb.dither, pb.gains, c.epsilon,
                    axpy(1.0, e0, theta_star), k_end, {}};
    iterate_dt(cfg, [&](const DtSample& s) {
      record(rep, envelope_dt(c, e0n, s.k) - norm2(s.theta_tilde), s.k, static_cast<double>(s.k), draw);
    });
  }
  return rep;
}

// ---------------------------------------------------------------------------
// LMI soundness sweeps

/// max over draws and t in [0, 10/delta] of ||exp(K H t)|| / (sqrt(p) e^{-delta t}).
inline NormSweep lmi_soundness_ct(const LmiCertificate& c, const UncertaintyModel& u, const GainSpec& g,
                                  int draws, std::uint64_t seed) {
  NormSweep worst;
  const double sp = std::sqrt(c.p);
  for (int draw = 0; draw < draws; ++draw) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(draw));
    const Matrix h = u.hessian_nominal + random_delta_h(u.dim(), u.kappa, u.diagonal, rng);
    const NormSweep s = norm_exp_sweep(g.matrix() * h, 10.0 / c.rate,
                                       [&](double t) { return sp * std::exp(-c.rate * t); });
    if (s.max_ratio > worst.max_ratio) worst = s;
  }
  return worst;
}

/// max over draws and k <= ceil(10 / (lambda eps)) of
/// ||(I + eps L H)^k|| / (sqrt(p) (1 - lambda eps)^k).
inline NormSweep lmi_soundness_dt(const LmiCertificate& c, const UncertaintyModel& u, const GainSpec& g,
                                  double epsilon, int draws, std::uint64_t seed) {
  if (!(c.rate * epsilon < 1.0)) throw ConfigError("lambda * epsilon must be < 1");
  NormSweep worst;
  const double sp = std::sqrt(c.p);
  const double q = 1.0 - c.rate * epsilon;
  const auto count = static_cast<long long>(std::ceil(10.0 / (c.rate * epsilon)));
  const std::size_t n = u.dim();
  for (int draw = 0; draw < draws; ++draw) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(draw));
    const Matrix h = u.hessian_nominal + random_delta_h(n, u.kappa, u.diagonal, rng);
    const Matrix a = Matrix::identity(n) + g.matrix() * h * epsilon;
    const NormSweep s =
        norm_power_sweep(a, count, [&](long long k) { return sp * std::pow(q, static_cast<double>(k)); });
    if (s.max_ratio > worst.max_ratio) worst = s;
  }
  return worst;
}

}  // namespace esc
