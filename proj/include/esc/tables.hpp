#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "esc/cert_ct.hpp"
#include "esc/cert_dt.hpp"
#include "esc/golden.hpp"
#include "esc/oracle.hpp"

namespace esc {

struct RowResult {
  golden::Row row;
  bool computed = false;
  double rate = golden::kNone;
  double epsilon_star = golden::kNone;
  double epsilon = golden::kNone;  ///< operating epsilon for the UB
  double ub = golden::kNone;
  std::vector<double> ub_history;
  bool pass = true;
  std::string note;
};

struct TableResult {
  int table = 0;
  std::vector<RowResult> rows;
  std::string csv;

  [[nodiscard]] bool passed() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

/// epsilon* within 5% or 0.001 absolute.
inline bool epsilon_matches(double computed, double published) {
  return std::abs(computed - published) <= std::max(0.05 * published, 1e-3);
}

inline bool rate_matches(double computed, double published) {
  return std::abs(computed - published) <= 1e-3 + 1e-12;
}

inline RowResult reproduce_row(const golden::Row& row) {
  RowResult r;
  r.row = row;
  if (!row.computed) {
    r.note = "n/a (external baseline)";
    return r;
  }
  r.computed = true;
  auto add_note = [&](const std::string& s) { r.note += (r.note.empty() ? "" : "; ") + s; };
  auto operate_at = [&]() {
    double want = !std::isnan(row.epsilon) ? row.epsilon : row.epsilon_star;
    if (std::isnan(want)) want = r.epsilon_star;
    if (want > r.epsilon_star) {
      add_note("published epsilon exceeds computed epsilon*; bound evaluated at epsilon*");
      want = r.epsilon_star;
    }
    return want;
  };
  if (row.mode == Mode::ct) {
    const CtProblem pb = make_ct_problem(row.ct_route, row.uncertainty, row.gains, row.dither, row.rate_override);
    r.rate = pb.delta;
    r.epsilon_star = ct_epsilon_star(pb, row.sigma0, row.sigma);
    if (!std::isnan(row.ub)) {
      r.epsilon = operate_at();
      const UltimateBound b = ultimate_bound_ct(pb, row.sigma0, row.sigma, r.epsilon);
      r.ub = b.ub;
      r.ub_history = b.history;
    }
  } else {
    const DtProblem pb = make_dt_problem(row.dt_route, row.uncertainty, row.gains, row.dither, row.rate_override);
    r.rate = pb.lambda;
    r.epsilon_star = dt_epsilon_star(pb, row.sigma0, row.sigma);
    if (!std::isnan(row.ub)) {
      r.epsilon = operate_at();
      const UltimateBound b = ultimate_bound_dt(pb, row.sigma0, row.sigma, r.epsilon);
      r.ub = b.ub;
      r.ub_history = b.history;
    }
  }
  if (row.rate_override > 0.0) add_note("rate taken from the published table");
  if (!std::isnan(row.rate) && !rate_matches(r.rate, row.rate)) {
    r.pass = false;
    add_note("rate mismatch");
  }
  if (!std::isnan(row.epsilon_star) && !epsilon_matches(r.epsilon_star, row.epsilon_star)) {
    r.pass = false;
    add_note("epsilon* mismatch");
  }
  if (!std::isnan(row.ub)) {
    if (!(r.ub >= row.ub_lo && r.ub <= row.ub_hi)) {
      r.pass = false;
      add_note("UB outside bracket");
    }
  }
  return r;
}

namespace detail {
inline std::string cell(double v) { return std::isnan(v) ? "" : format_double(v); }
inline std::string quoted(const std::string& s) { return "\"" + s + "\""; }
}  // namespace detail

/// One CSV per table: the published columns, the recomputed values and a
/// PASS/FAIL status.
inline TableResult reproduce_table(int table) {
  TableResult t{table, {}, {}};
  for (const auto& row : golden::table_rows(table)) t.rows.push_back(reproduce_row(row));

  const bool dt = !t.rows.empty() && t.rows.front().row.mode == Mode::dt;
  const std::string rate = dt ? "lambda" : "delta";
  const bool has_eps_star = !std::isnan(t.rows.front().row.epsilon_star);
  const bool has_eps = !std::isnan(t.rows.front().row.epsilon);
  const bool has_ub = !std::isnan(t.rows.front().row.ub);

  std::ostringstream os;
  os << "row,method,sigma0,sigma," << rate;
  if (has_eps_star) os << ",epsilon_star";
  if (has_eps) os << ",epsilon";
  if (has_ub) os << ",ub";
  os << ",computed_" << rate;
  if (has_eps_star) os << ",computed_epsilon_star";
  if (has_ub) os << ",computed_epsilon,computed_ub,ub_bracket_lo,ub_bracket_hi";
  os << ",status,note\n";
  for (const auto& r : t.rows) {
    const auto& g = r.row;
    os << g.row << ',' << detail::quoted(g.method) << ',' << detail::cell(g.sigma0) << ','
       << detail::cell(g.sigma) << ',' << detail::cell(g.rate);
    if (has_eps_star) os << ',' << detail::cell(g.epsilon_star);
    if (has_eps) os << ',' << detail::cell(g.epsilon);
    if (has_ub) os << ',' << detail::cell(g.ub);
    if (!r.computed) {
      const std::string na = "n/a (external baseline)";
      os << ',' << na;
      if (has_eps_star) os << ',' << na;
      if (has_ub) os << ',' << na << ',' << na << ",,";
      os << ",n/a,\n";
      continue;
    }
    os << ',' << detail::cell(r.rate);
    if (has_eps_star) os << ',' << detail::cell(r.epsilon_star);
    if (has_ub)
      os << ',' << detail::cell(r.epsilon) << ',' << detail::cell(r.ub) << ',' << detail::cell(g.ub_lo) << ','
         << detail::cell(g.ub_hi);
    os << ',' << (r.pass ? "PASS" : "FAIL") << ',' << detail::quoted(r.note) << '\n';
  }
  t.csv = os.str();
  return t;
}

inline std::vector<TableResult> reproduce_tables(const std::vector<int>& which) {
  std::vector<TableResult> out;
  for (int t : which) out.push_back(reproduce_table(t));
  return out;
}

}  // namespace esc
