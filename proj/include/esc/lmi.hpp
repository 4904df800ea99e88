#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "esc/errors.hpp"
#include "esc/linalg.hpp"
#include "esc/quadmap.hpp"

namespace esc {

enum class Mode { ct, dt };

inline constexpr double kMarginTol = 1e-9;

/// Eigenvalues of a symmetric matrix in ascending order.
inline Vector sym_eigs(const Matrix& m) {
  if (m.rows() > 32) throw DimensionError("sym_eigs supports n <= 32");
  return jacobi_eigen(m).values;
}

/// Solves A^T P + P A = -Q for symmetric P over the n(n+1)/2 upper-triangle
/// unknowns. Throws NotHurwitzError when the solution is singular or not
/// positive definite.
inline Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  if (!a.is_square() || q.rows() != a.rows() || !q.is_square())
    throw DimensionError("lyapunov shape mismatch");
  if (asymmetry(q) > 1e-12) throw NotSymmetricError("Q is not symmetric");
  const std::size_t n = a.rows();
  const std::size_t m = n * (n + 1) / 2;
  std::vector<std::size_t> index(n * n);
  for (std::size_t i = 0, k = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j, ++k) index[i * n + j] = index[j * n + i] = k;

  // (A^T P + P A)_ij = sum_r A_ri P_rj + P_ir A_rj
  Matrix lhs(m, m);
  Matrix rhs(m, 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const std::size_t row = index[i * n + j];
      for (std::size_t r = 0; r < n; ++r) {
        lhs(row, index[r * n + j]) += a(r, i);
        lhs(row, index[i * n + r]) += a(r, j);
      }
      rhs(row, 0) = -q(i, j);
    }
  Matrix x;
  try {
    x = solve(lhs, rhs);
  } catch (const SingularMatrixError&) {
    throw NotHurwitzError("Lyapunov operator is singular");
  }
  Matrix p(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = x(index[i * n + j], 0);
  if (!is_positive_definite(p)) throw NotHurwitzError("Lyapunov solution is not positive definite");
  return p;
}

struct NormalizedP {
  Matrix p_norm;  ///< I <= p_norm <= p I
  double p = 1.0;
};

inline NormalizedP normalize_p(const Matrix& p) {
  const Vector ev = sym_eigs(p);
  if (!(ev.front() > 0.0)) throw NotPositiveDefiniteError("P is not positive definite");
  return {p * (1.0 / ev.front()), ev.back() / ev.front()};
}

struct Verdict {
  bool feasible = false;
  double margin = 0.0;  ///< -lambda_max(Phi1)
};

inline Matrix phi1_ct(const Matrix& p, double zeta, double delta, const UncertaintyModel& u,
                      const GainSpec& g) {
  const std::size_t n = u.dim();
  if (p.rows() != n || g.dim() != n) throw DimensionError("LMI data dimension mismatch");
  const Matrix k = g.matrix();
  const Matrix pk = p * k;
  const Matrix top = symmetric_part(pk * u.hessian_nominal) * 2.0 + p * (2.0 * delta) +
                     Matrix::identity(n) * (zeta * u.kappa * u.kappa);
  return block2x2(top, pk, pk.transpose(), Matrix::identity(n) * -zeta);
}

inline Verdict check_phi1_ct(const Matrix& p, double zeta, double delta, const UncertaintyModel& u,
                             const GainSpec& g, double tol = kMarginTol) {
  const double lmax = sym_eigs(phi1_ct(p, zeta, delta, u, g)).back();
  return {lmax < -tol, -lmax};
}

inline Matrix phi1_dt(const Matrix& p, double zeta, double lambda, double epsilon_star,
                      const UncertaintyModel& u, const GainSpec& g) {
  const std::size_t n = u.dim();
  if (p.rows() != n || g.dim() != n) throw DimensionError("LMI data dimension mismatch");
  if (lambda * epsilon_star >= 1.0) throw ConfigError("lambda * epsilon_star must be < 1");
  const Matrix l = g.matrix();
  const Matrix lh = l * u.hessian_nominal;
  const Matrix pl = p * l;
  const Matrix lhT_p = lh.transpose() * p;
  const Matrix top = symmetric_part(p * lh) * 2.0 + (lhT_p * lh) * epsilon_star + p * (2.0 * lambda) +
                     Matrix::identity(n) * (zeta * u.kappa * u.kappa);
  const Matrix off = pl + (lhT_p * l) * epsilon_star;
  const Matrix bottom = Matrix::identity(n) * -zeta + (l.transpose() * pl) * epsilon_star;
  return block2x2(symmetric_part(top), off, off.transpose(), symmetric_part(bottom));
}

inline Verdict check_phi1_dt(const Matrix& p, double zeta, double lambda, double epsilon_star,
                             const UncertaintyModel& u, const GainSpec& g, double tol = kMarginTol) {
  const double lmax = sym_eigs(phi1_dt(p, zeta, lambda, epsilon_star, u, g)).back();
  return {lmax < -tol, -lmax};
}

struct ZetaChoice {
  double zeta = 1.0;
  double margin = 0.0;
};

/// Maximizes margin(zeta) over log10(zeta) in [-6, 6]. Golden-section first;
/// if either end of the range beats the golden result the unimodality
/// assumption failed and a 200-point log grid is used instead.
template <class MarginFn>
ZetaChoice best_zeta(MarginFn&& margin) {
  constexpr double lo0 = -6.0, hi0 = 6.0;
  auto f = [&](double x) { return margin(std::pow(10.0, x)); };
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo0, b = hi0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && b - a > 1e-6; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  ZetaChoice best{std::pow(10.0, 0.5 * (a + b)), f(0.5 * (a + b))};
  const double f_lo = f(lo0), f_hi = f(hi0);
  if (f_lo <= best.margin && f_hi <= best.margin) return best;
  for (int i = 0; i < 200; ++i) {
    const double x = lo0 + (hi0 - lo0) * i / 199.0;
    const double fx = f(x);
    if (fx > best.margin) best = {std::pow(10.0, x), fx};
  }
  return best;
}

struct LmiCertificate {
  Mode mode = Mode::ct;
  Matrix p_norm;
  double p = 1.0;
  double zeta = 1.0;
  double rate = 0.0;          ///< delta (ct) or lambda (dt)
  double epsilon_star = 0.0;  ///< dt only: the epsilon the LMI was checked at
  double margin = 0.0;
};

inline Verdict check(const LmiCertificate& c, const UncertaintyModel& u, const GainSpec& g) {
  return c.mode == Mode::ct ? check_phi1_ct(c.p_norm, c.zeta, c.rate, u, g)
                            : check_phi1_dt(c.p_norm, c.zeta, c.rate, c.epsilon_star, u, g);
}

inline ZetaChoice best_zeta_for(Mode mode, const Matrix& p, double rate, double epsilon_star,
                                const UncertaintyModel& u, const GainSpec& g) {
  if (mode == Mode::ct)
    return best_zeta([&](double z) { return check_phi1_ct(p, z, rate, u, g).margin; });
  return best_zeta([&](double z) { return check_phi1_dt(p, z, rate, epsilon_star, u, g).margin; });
}

/// 2 max |eig(sym(G H_nominal))|.
inline double rate_upper_bound(const UncertaintyModel& u, const GainSpec& g) {
  const Vector ev = sym_eigs(symmetric_part(g.matrix() * u.hessian_nominal));
  return 2.0 * std::max(std::abs(ev.front()), std::abs(ev.back()));
}

/// Largest rate with a feasible verdict for a fixed P, by bisection to 1e-4
/// relative. Returns nullopt if even a vanishing rate is infeasible.
inline std::optional<LmiCertificate> max_rate_for_p(Mode mode, const Matrix& p_raw,
                                                    const UncertaintyModel& u, const GainSpec& g,
                                                    double epsilon_star) {
  const NormalizedP np = normalize_p(p_raw);
  double hi = rate_upper_bound(u, g);
  if (mode == Mode::dt && epsilon_star > 0.0) hi = std::min(hi, (1.0 - 1e-9) / epsilon_star);
  auto feasible_at = [&](double rate) {
    const ZetaChoice z = best_zeta_for(mode, np.p_norm, rate, epsilon_star, u, g);
    return std::pair{z.margin > kMarginTol, z};
  };
  double lo = hi * 1e-8;
  auto [ok, z_lo] = feasible_at(lo);
  if (!ok) return std::nullopt;
  if (auto [ok_hi, z_hi] = feasible_at(hi); ok_hi) {
    lo = hi;
    z_lo = z_hi;
  } else {
    while ((hi - lo) > 1e-4 * hi) {
      const double mid = 0.5 * (lo + hi);
      auto [ok_mid, z_mid] = feasible_at(mid);
      if (ok_mid) {
        lo = mid;
        z_lo = z_mid;
      } else {
        hi = mid;
      }
    }
  }
  return LmiCertificate{mode, np.p_norm, np.p, z_lo.zeta, lo, mode == Mode::dt ? epsilon_star : 0.0,
                        z_lo.margin};
}

/// Searches the segment P = (1 - mu) I + mu P_lyap, mu in {0, .25, .5, .75, 1},
/// where P_lyap solves (G H)^T P + P (G H) = -I. Keeps the largest rate and,
/// among rates equal to 1e-4 relative, the smallest p.
inline LmiCertificate search_certificate(const UncertaintyModel& u, const GainSpec& g, Mode mode,
                                         double epsilon_star_hint = 0.0) {
  validate(u);
  validate(g, u.hessian_nominal);
  const std::size_t n = u.dim();
  const Matrix gh = g.matrix() * u.hessian_nominal;
  const Matrix p_lyap = normalize_p(solve_lyapunov(gh, Matrix::identity(n))).p_norm;
  std::optional<LmiCertificate> best;
  for (double mu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const Matrix p = Matrix::identity(n) * (1.0 - mu) + p_lyap * mu;
    auto c = max_rate_for_p(mode, p, u, g, epsilon_star_hint);
    if (!c) continue;
    if (!best || c->rate > best->rate * (1.0 + 1e-4) ||
        (c->rate >= best->rate * (1.0 - 1e-4) && c->p < best->p))
      best = std::move(c);
  }
  if (!best) throw InfeasibleError("no feasible decay rate for the LMI");
  return *best;
}

}  // namespace esc
