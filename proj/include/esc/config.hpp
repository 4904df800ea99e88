#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "esc/cert_ct.hpp"
#include "esc/cert_dt.hpp"
#include "esc/errors.hpp"
#include "esc/lmi.hpp"
#include "esc/oracle.hpp"
#include "esc/quadmap.hpp"
#include "esc/sim_ct.hpp"
#include "esc/sim_dt.hpp"

namespace esc::config {

using nlohmann::json;

// ---------------------------------------------------------------------------
// scalar / vector / matrix readers

inline double number(const json& j, const std::string& key) {
  if (!j.contains(key)) throw ConfigError("missing field '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("field '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("field '" + key + "' must be finite");
  return x;
}

inline double number_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? number(j, key) : fallback;
}

inline Vector vector_from(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  Vector v;
  for (const json& x : j) {
    if (!x.is_number()) throw ConfigError(what + " must contain numbers");
    v.push_back(x.get<double>());
    if (!std::isfinite(v.back())) throw ConfigError(what + " must be finite");
  }
  return v;
}

inline Matrix matrix_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ConfigError(what + " must be a non-empty array of rows");
  const std::size_t n = j.size();
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vector row = vector_from(j[i], what);
    if (row.size() != n) throw DimensionError(what + " must be square");
    for (std::size_t k = 0; k < n; ++k) m(i, k) = row[k];
  }
  return m;
}

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// problem pieces

inline QuadraticMap map_from(const json& j) {
  return make_quadratic_map(number_or(j, "q_star", 0.0), vector_from(j.at("theta_star"), "map.theta_star"),
                            matrix_from(j.at("hessian"), "map.hessian"));
}

/// Reads an uncertainty block. Without one, the set is the map itself:
/// kappa = 0 and [h_min, h_max] = the Hessian spectrum.
inline UncertaintyModel uncertainty_from(const json* j, const std::optional<QuadraticMap>& map) {
  UncertaintyModel u;
  if (j) {
    if (j->contains("interval")) {
      const json& iv = j->at("interval");
      u = interval_uncertainty(static_cast<std::size_t>(iv.at("n").get<int>()), number_or(*j, "q_star_max", 0.0),
                               number(iv, "h_lo"), number(iv, "h_hi"), number_or(*j, "sigma0", 1.0));
      return u;
    }
    u.q_star_max = number_or(*j, "q_star_max", 0.0);
    if (j->contains("hessian_nominal"))
      u.hessian_nominal = matrix_from(j->at("hessian_nominal"), "uncertainty.hessian_nominal");
    else if (map)
      u.hessian_nominal = map->hessian;
    else
      throw ConfigError("uncertainty.hessian_nominal is required without a map");
    u.kappa = number_or(*j, "kappa", 0.0);
    const Vector ev = jacobi_eigen(symmetric_part(u.hessian_nominal)).values;
    u.h_min = number_or(*j, "h_min", ev.front() - u.kappa);
    u.h_max = number_or(*j, "h_max", ev.back() + u.kappa);
    u.sigma0 = number_or(*j, "sigma0", 1.0);
    u.diagonal = j->value("diagonal", false);
    return u;
  }
  if (!map) throw ConfigError("need an uncertainty block or a map");
  const Vector ev = jacobi_eigen(map->hessian).values;
  u.q_star_max = std::abs(map->q_star);
  u.hessian_nominal = map->hessian;
  u.h_min = ev.front();
  u.h_max = ev.back();
  u.diagonal = is_diagonal(map->hessian);
  return u;
}

inline json to_json(const UncertaintyModel& u) {
  return {{"q_star_max", u.q_star_max}, {"hessian_nominal", to_json(u.hessian_nominal)},
          {"kappa", u.kappa},           {"h_min", u.h_min},
          {"h_max", u.h_max},           {"sigma0", u.sigma0},
          {"diagonal", u.diagonal}};
}

inline DitherSpec dither_from(const json& j, TimeBase base) {
  const Vector a = vector_from(j.at("amplitudes"), "dither.amplitudes");
  std::vector<int> idx;
  if (j.contains("indices")) {
    for (const json& x : j.at("indices")) {
      if (!x.is_number_integer()) throw ConfigError("dither.indices must be integers");
      idx.push_back(x.get<int>());
    }
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) idx.push_back(static_cast<int>(i) + 1);
  }
  if (base == TimeBase::continuous) return continuous_dither(a, idx, number(j, "epsilon"));
  if (!j.contains("period") || !j.at("period").is_number_integer())
    throw ConfigError("dither.period must be an integer");
  return discrete_dither(a, idx, j.at("period").get<int>());
}

inline json to_json(const DitherSpec& d) {
  json j{{"amplitudes", d.amplitudes}, {"indices", d.freq_indices}};
  if (d.base == TimeBase::continuous)
    j["epsilon"] = d.epsilon;
  else
    j["period"] = d.period;
  return j;
}

inline GainSpec gains_from(const json& j) { return {vector_from(j, "gains")}; }

inline json to_json(const LmiCertificate& c) {
  return {{"mode", c.mode == Mode::ct ? "ct" : "dt"},
          {"P", to_json(c.p_norm)},
          {"p", c.p},
          {"zeta", c.zeta},
          {"rate", c.rate},
          {"epsilon_star", c.epsilon_star},
          {"margin", c.margin}};
}

inline LmiCertificate lmi_from(const json& j) {
  LmiCertificate c;
  const std::string m = j.at("mode").get<std::string>();
  if (m != "ct" && m != "dt") throw ConfigError("lmi.mode must be ct or dt");
  c.mode = m == "ct" ? Mode::ct : Mode::dt;
  c.p_norm = matrix_from(j.at("P"), "lmi.P");
  c.p = number(j, "p");
  c.zeta = number(j, "zeta");
  c.rate = number(j, "rate");
  c.epsilon_star = number_or(j, "epsilon_star", 0.0);
  c.margin = number_or(j, "margin", 0.0);
  return c;
}

inline CtRoute ct_route_from(const std::string& s) {
  if (s == "theorem1") return CtRoute::theorem1;
  if (s == "corollary1") return CtRoute::corollary1;
  if (s == "remark3") return CtRoute::remark3;
  throw ConfigError("unknown continuous route '" + s + "'");
}

inline DtRoute dt_route_from(const std::string& s) {
  if (s == "theorem2") return DtRoute::theorem2;
  if (s == "corollary2") return DtRoute::corollary2;
  if (s == "scalar") return DtRoute::scalar;
  throw ConfigError("unknown discrete route '" + s + "'");
}

// ---------------------------------------------------------------------------
// run configuration

struct SimOptions {
  Vector theta_hat0;
  double t_end = 0.0;
  double step = 0.0;
  double epsilon = 0.0;  ///< discrete step size
  long long k_end = 0;
  bool diagnostics = false;
};

struct CertOptions {
  double sigma0 = 0.0;
  double sigma = 0.0;
  double epsilon = 0.0;  ///< 0 operates at epsilon*
  double rate_override = 0.0;
  double beta_frac = 0.1;
  int sweep_draws = 0;
  std::optional<std::uint64_t> seed;
  std::optional<LmiCertificate> lmi;
  Vector theta_star;  ///< extremum used by the envelope sweep
};

struct RunConfig {
  std::string mode;
  std::optional<QuadraticMap> map;
  std::optional<UncertaintyModel> uncertainty;
  std::optional<DitherSpec> dither;
  std::optional<GainSpec> gains;
  std::string route;
  SimOptions sim;
  CertOptions cert;
  std::string output;  ///< file path, empty = stdout
  std::string report;  ///< sweep report path
  std::vector<int> tables;
};

inline const std::vector<std::string>& known_modes() {
  static const std::vector<std::string> m{"simulate-ct", "simulate-dt", "certify-ct",
                                          "certify-dt",  "tables",      "identities"};
  return m;
}

inline bool is_dt_mode(const std::string& m) { return m == "simulate-dt" || m == "certify-dt"; }

inline RunConfig parse_run_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> keys{"mode",  "map", "uncertainty", "dither", "gains",
                                             "route", "sim", "cert",        "output", "tables"};
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw ConfigError("unknown key '" + k + "'");
  RunConfig c;
  if (!j.contains("mode") || !j.at("mode").is_string()) throw ConfigError("'mode' must be a string");
  c.mode = j.at("mode").get<std::string>();
  const auto& modes = known_modes();
  if (std::find(modes.begin(), modes.end(), c.mode) == modes.end())
    throw ConfigError("unknown mode '" + c.mode + "'");
  const TimeBase base = is_dt_mode(c.mode) ? TimeBase::discrete : TimeBase::continuous;
  try {
    if (j.contains("map")) c.map = map_from(j.at("map"));
    if (j.contains("dither")) c.dither = dither_from(j.at("dither"), base);
    if (j.contains("gains")) c.gains = gains_from(j.at("gains"));
    if (j.contains("uncertainty") || (c.map && c.mode.rfind("certify", 0) == 0))
      c.uncertainty = uncertainty_from(j.contains("uncertainty") ? &j.at("uncertainty") : nullptr, c.map);
    c.route = j.value("route", "");
    if (j.contains("sim")) {
      const json& s = j.at("sim");
      if (s.contains("theta_hat0")) c.sim.theta_hat0 = vector_from(s.at("theta_hat0"), "sim.theta_hat0");
      c.sim.t_end = number_or(s, "t_end", 0.0);
      c.sim.step = number_or(s, "step", 0.0);
      c.sim.epsilon = number_or(s, "epsilon", 0.0);
      c.sim.k_end = static_cast<long long>(number_or(s, "k_end", 0.0));
      c.sim.diagnostics = s.value("diagnostics", false);
    }
    if (j.contains("cert")) {
      const json& s = j.at("cert");
      c.cert.sigma0 = number_or(s, "sigma0", 0.0);
      c.cert.sigma = number_or(s, "sigma", 0.0);
      c.cert.epsilon = number_or(s, "epsilon", 0.0);
      c.cert.rate_override = number_or(s, "rate_override", 0.0);
      c.cert.beta_frac = number_or(s, "beta_frac", 0.1);
      c.cert.sweep_draws = static_cast<int>(number_or(s, "sweep_draws", 0.0));
      if (s.contains("seed")) c.cert.seed = s.at("seed").get<std::uint64_t>();
      if (s.contains("lmi")) c.cert.lmi = lmi_from(s.at("lmi"));
      if (s.contains("theta_star")) c.cert.theta_star = vector_from(s.at("theta_star"), "cert.theta_star");
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      c.output = o.value("path", "");
      c.report = o.value("report", "");
    }
    if (j.contains("tables"))
      for (const json& t : j.at("tables")) c.tables.push_back(t.get<int>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (c.uncertainty && c.cert.sigma0 > 0.0) c.uncertainty->sigma0 = c.cert.sigma0;
  return c;
}

inline json load_json(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
  std::ifstream in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// certificates

inline json certificate_json(const CtCertificate& c) {
  json d{{"D", c.deltas.D}, {"D1", c.deltas.D1}, {"D2", c.deltas.D2}, {"D3", c.deltas.D3}};
  json problem{{"uncertainty", to_json(c.problem.uncertainty)},
               {"gains", c.problem.gains.gains},
               {"dither", to_json(c.problem.dither)}};
  if (c.problem.lmi) problem["lmi"] = to_json(*c.problem.lmi);
  return {{"mode", "ct"},
          {"route", to_string(c.route())},
          {"delta", c.delta()},
          {"p", c.p()},
          {"epsilon_star", c.epsilon_star},
          {"epsilon", c.epsilon},
          {"sigma0", c.sigma0},
          {"sigma", c.sigma},
          {"deltas", d},
          {"ball", c.ball},
          {"ub", c.ub()},
          {"sigma_final", c.bound.sigma_final},
          {"ub_history", c.bound.history},
          {"problem", problem}};
}

inline json certificate_json(const DtCertificate& c) {
  json d{{"D", c.deltas.D}, {"D1", c.deltas.D1}, {"D2", c.deltas.D2}, {"D3", c.deltas.D3}};
  json problem{{"uncertainty", to_json(c.problem.uncertainty)},
               {"gains", c.problem.gains.gains},
               {"dither", to_json(c.problem.dither)}};
  if (c.problem.lmi) problem["lmi"] = to_json(*c.problem.lmi);
  return {{"mode", "dt"},
          {"route", to_string(c.route())},
          {"lambda", c.lambda()},
          {"p", c.p()},
          {"epsilon_star", c.epsilon_star},
          {"epsilon", c.epsilon},
          {"sigma0", c.sigma0},
          {"sigma", c.sigma},
          {"deltas", d},
          {"ball", c.ball},
          {"ub", c.ub()},
          {"sigma_final", c.bound.sigma_final},
          {"ub_history", c.bound.history},
          {"problem", problem}};
}

struct Reverification {
  bool inequality_holds = false;  ///< route inequality at the stored epsilon
  bool lmi_feasible = true;       ///< stored LMI certificate, when present
  double epsilon_star = 0.0;
  double ub = 0.0;
  bool matches = false;  ///< recomputed epsilon* and UB equal the stored ones
};

/// Rebuilds the problem stored in a certificate JSON with its stored rate and
/// recomputes the verdicts.
inline Reverification reverify(const json& cert) {
  try {
    const json& pj = cert.at("problem");
    UncertaintyModel u;
    u.q_star_max = number(pj.at("uncertainty"), "q_star_max");
    u.hessian_nominal = matrix_from(pj.at("uncertainty").at("hessian_nominal"), "hessian_nominal");
    u.kappa = number(pj.at("uncertainty"), "kappa");
    u.h_min = number(pj.at("uncertainty"), "h_min");
    u.h_max = number(pj.at("uncertainty"), "h_max");
    u.sigma0 = number(pj.at("uncertainty"), "sigma0");
    u.diagonal = pj.at("uncertainty").at("diagonal").get<bool>();
    const GainSpec g = gains_from(pj.at("gains"));
    std::optional<LmiCertificate> lmi;
    if (pj.contains("lmi")) lmi = lmi_from(pj.at("lmi"));
    const double s0 = number(cert, "sigma0"), s = number(cert, "sigma"), eps = number(cert, "epsilon");
    Reverification r;
    if (cert.at("mode") == "ct") {
      const DitherSpec d = dither_from(pj.at("dither"), TimeBase::continuous);
      const CtRoute route = ct_route_from(cert.at("route").get<std::string>());
      const double rate = route == CtRoute::theorem1 ? 0.0 : number(cert, "delta");
      const CtProblem pb = make_ct_problem(route, u, g, d, rate, lmi);
      r.inequality_holds = ct_inequality_holds(pb, s0, s, eps);
      if (lmi) r.lmi_feasible = check(*lmi, u, g).feasible;
      r.epsilon_star = ct_epsilon_star(pb, s0, s);
      r.ub = ultimate_bound_ct(pb, s0, s, eps).ub;
    } else {
      const DitherSpec d = dither_from(pj.at("dither"), TimeBase::discrete);
      const DtRoute route = dt_route_from(cert.at("route").get<std::string>());
      const double rate = route == DtRoute::theorem2 ? 0.0 : number(cert, "lambda");
      const DtProblem pb = make_dt_problem(route, u, g, d, rate, lmi);
      r.inequality_holds = dt_inequality_holds(pb, s0, s, eps);
      if (lmi) r.lmi_feasible = check(*lmi, u, g).feasible;
      r.epsilon_star = dt_epsilon_star(pb, s0, s);
      r.ub = ultimate_bound_dt(pb, s0, s, eps).ub;
    }
    r.matches = r.epsilon_star == number(cert, "epsilon_star") && r.ub == number(cert, "ub");
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed certificate: ") + e.what());
  }
}

inline json to_json(const SweepReport& r) {
  json j{{"digest", r.digest},           {"worst_margin", r.worst_margin}, {"worst_index", r.worst_index},
         {"worst_time", r.worst_time},   {"worst_draw", r.worst_draw},     {"samples", r.samples},
         {"draws", r.draws},             {"passed", r.passed()}};
  j["violating_index"] = r.violating_index ? json(*r.violating_index) : json(nullptr);
  j["violating_time"] = r.violating_time ? json(*r.violating_time) : json(nullptr);
  return j;
}

inline json to_json(const DitherIdentityReport& r) {
  return {{"mean", r.mean}, {"demod", r.demod}, {"triple", r.triple}, {"samples", r.samples}, {"worst", r.worst()}};
}

// ---------------------------------------------------------------------------
// trajectory CSV

namespace detail {
inline void header(std::ostream& os, const char* first, std::size_t n, bool diag) {
  os << first;
  for (std::size_t i = 1; i <= n; ++i) os << ",theta_hat_" << i;
  os << ",theta_tilde_norm,y";
  if (diag) os << ",G_norm,Y1_norm,Y2_norm,z_norm";
  os << '\n';
}
template <class Diag>
void diag_cells(std::ostream& os, const Diag& dg, long long row) {
  if (row < 0) {
    os << ",,,,";
    return;
  }
  const auto r = static_cast<std::size_t>(row);
  os << ',' << format_double(norm2(dg.G[r])) << ',' << format_double(norm2(dg.Y1[r])) << ','
     << format_double(norm2(dg.Y2[r])) << ',' << format_double(norm2(dg.z[r]));
}
}  // namespace detail

/// t, theta_hat_1..n, |theta~|, y and, when present, |G|, |Y1|, |Y2|, |z|
/// (empty before the first full period). 17 significant digits; every
/// stride-th row plus the last.
inline void write_csv(std::ostream& os, const Trajectory& tr, std::size_t stride = 1) {
  const std::size_t n = tr.theta_hat.empty() ? 0 : tr.theta_hat.front().size();
  detail::header(os, "t", n, tr.diagnostics.has_value());
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t m = 0; m < tr.size(); ++m) {
    if (m % stride != 0 && m + 1 != tr.size()) continue;
    os << format_double(tr.times[m]);
    for (double x : tr.theta_hat[m]) os << ',' << format_double(x);
    os << ',' << format_double(norm2(tr.theta_tilde[m])) << ',' << format_double(tr.y[m]);
    if (tr.diagnostics) {
      const long long row = static_cast<long long>(m) - static_cast<long long>(tr.diagnostics->first_index);
      detail::diag_cells(os, *tr.diagnostics, row);
    }
    os << '\n';
  }
}

inline void write_csv(std::ostream& os, const DtTrajectory& tr, std::size_t stride = 1) {
  const std::size_t n = tr.theta_hat.empty() ? 0 : tr.theta_hat.front().size();
  detail::header(os, "k", n, tr.diagnostics.has_value());
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    if (k % stride != 0 && k + 1 != tr.size()) continue;
    os << k;
    for (double x : tr.theta_hat[k]) os << ',' << format_double(x);
    os << ',' << format_double(norm2(tr.theta_tilde[k])) << ',' << format_double(tr.y[k]);
    if (tr.diagnostics) {
      const long long row = static_cast<long long>(k) - tr.diagnostics->first_index;
      detail::diag_cells(os, *tr.diagnostics, row);
    }
    os << '\n';
  }
}

}  // namespace esc::config
