// es_certify: simulation, certification, table reproduction and dither checks.
//
// Exit codes: 0 ok, 1 numeric failure, 2 config error, 3 infeasible
// certification, 4 envelope violation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "esc/config.hpp"
#include "esc/golden.hpp"
#include "esc/tables.hpp"

namespace {

using esc::config::json;

constexpr int kExitNumeric = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitViolation = 4;

struct Options {
  std::string config_path;
  std::string out;
  std::string route;
  std::string figure;
  std::string check;
  double epsilon = 0.0;
  double t_end = 0.0;
  long long k_end = 0;
  std::size_t stride = 1;
  bool diagnostics = false;
  int sweep = 0;
  long long seed = -1;
  std::vector<int> which;
  int n = 0;
  int T = 0;
  int random = 0;
  std::map<std::string, bool> presets;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw esc::ConfigError("cannot write " + path);
  out << text;
}

std::uint64_t seed_of(const Options& o, const esc::config::RunConfig* rc) {
  if (o.seed >= 0) return static_cast<std::uint64_t>(o.seed);
  if (rc && rc->cert.seed) return *rc->cert.seed;
  return esc::default_seed();
}

/// The golden row named by a --tableT-rowR flag, if any.
std::optional<esc::golden::Row> preset_row(const Options& o) {
  std::optional<esc::golden::Row> found;
  for (const auto& [name, on] : o.presets) {
    if (!on) continue;
    if (found) throw esc::ConfigError("more than one table preset given");
    int t = 0, r = 0;
    std::sscanf(name.c_str(), "table%d-row%d", &t, &r);
    found = esc::golden::find_row(t, r);
  }
  return found;
}

// ---------------------------------------------------------------------------
// certify

int certify_ct(const Options& o, const esc::config::RunConfig* rc) {
  using namespace esc;
  CtProblem pb;
  double s0 = 0.0, s = 0.0, eps = o.epsilon, beta = 0.1;
  Vector theta_star;
  if (auto row = preset_row(o)) {
    if (row->mode != Mode::ct) throw ConfigError("preset is a discrete-time row");
    const CtRoute route = o.route.empty() ? row->ct_route : config::ct_route_from(o.route);
    pb = make_ct_problem(route, row->uncertainty, row->gains, row->dither, row->rate_override);
    s0 = row->sigma0;
    s = row->sigma;
    theta_star = golden::theta_star_for(row->table, row->uncertainty.dim());
  } else if (rc) {
    if (!rc->uncertainty || !rc->gains || !rc->dither)
      throw ConfigError("certify-ct needs uncertainty (or map), gains and dither");
    const std::string r = o.route.empty() ? rc->route : o.route;
    if (r.empty()) throw ConfigError("no route given");
    pb = make_ct_problem(config::ct_route_from(r), *rc->uncertainty, *rc->gains, *rc->dither,
                         rc->cert.rate_override, rc->cert.lmi);
    s0 = rc->cert.sigma0;
    s = rc->cert.sigma;
    if (eps <= 0.0) eps = rc->cert.epsilon;
    beta = rc->cert.beta_frac;
    theta_star = !rc->cert.theta_star.empty() ? rc->cert.theta_star
                 : rc->map                    ? rc->map->theta_star
                                              : Vector(pb.uncertainty.dim(), 0.0);
  } else {
    throw ConfigError("certify-ct needs --config or a table preset");
  }
  pb.uncertainty.sigma0 = s0;
  const CtCertificate c = certify_ct(pb, s0, s, eps, beta);
  json out = config::certificate_json(c);
  int code = 0;
  const int draws = o.sweep > 0 ? o.sweep : (rc ? rc->cert.sweep_draws : 0);
  if (draws > 0) {
    const SweepReport rep = envelope_sweep_ct(c, theta_star, draws, seed_of(o, rc));
    out["sweep"] = config::to_json(rep);
    if (!rep.passed()) code = kExitViolation;
  }
  emit(o.out, out.dump(2) + "\n");
  return code;
}

int certify_dt(const Options& o, const esc::config::RunConfig* rc) {
  using namespace esc;
  DtProblem pb;
  double s0 = 0.0, s = 0.0, eps = o.epsilon, beta = 0.1;
  Vector theta_star;
  if (auto row = preset_row(o)) {
    if (row->mode != Mode::dt) throw ConfigError("preset is a continuous-time row");
    const DtRoute route = o.route.empty() ? row->dt_route : config::dt_route_from(o.route);
    pb = make_dt_problem(route, row->uncertainty, row->gains, row->dither, row->rate_override);
    s0 = row->sigma0;
    s = row->sigma;
    theta_star = golden::theta_star_for(row->table, row->uncertainty.dim());
  } else if (rc) {
    if (!rc->uncertainty || !rc->gains || !rc->dither)
      throw ConfigError("certify-dt needs uncertainty (or map), gains and dither");
    const std::string r = o.route.empty() ? rc->route : o.route;
    if (r.empty()) throw ConfigError("no route given");
    pb = make_dt_problem(config::dt_route_from(r), *rc->uncertainty, *rc->gains, *rc->dither,
                         rc->cert.rate_override, rc->cert.lmi, rc->cert.epsilon);
    s0 = rc->cert.sigma0;
    s = rc->cert.sigma;
    if (eps <= 0.0) eps = rc->cert.epsilon;
    beta = rc->cert.beta_frac;
    theta_star = !rc->cert.theta_star.empty() ? rc->cert.theta_star
                 : rc->map                    ? rc->map->theta_star
                                              : Vector(pb.uncertainty.dim(), 0.0);
  } else {
    throw ConfigError("certify-dt needs --config or a table preset");
  }
  pb.uncertainty.sigma0 = s0;
  const DtCertificate c = certify_dt(pb, s0, s, eps, beta);
  json out = config::certificate_json(c);
  int code = 0;
  const int draws = o.sweep > 0 ? o.sweep : (rc ? rc->cert.sweep_draws : 0);
  if (draws > 0) {
    const SweepReport rep = envelope_sweep_dt(c, theta_star, draws, seed_of(o, rc));
    out["sweep"] = config::to_json(rep);
    if (!rep.passed()) code = kExitViolation;
  }
  emit(o.out, out.dump(2) + "\n");
  return code;
}

int check_certificate(const Options& o) {
  const json cert = esc::config::load_json(o.check);
  const auto r = esc::config::reverify(cert);
  json out{{"inequality_holds", r.inequality_holds}, {"lmi_feasible", r.lmi_feasible},
           {"epsilon_star", r.epsilon_star},          {"ub", r.ub},
           {"matches", r.matches}};
  emit(o.out, out.dump(2) + "\n");
  if (!r.matches) return kExitConfig;
  return r.inequality_holds && r.lmi_feasible ? 0 : kExitInfeasible;
}

// ---------------------------------------------------------------------------
// simulate

int simulate_ct(const Options& o, const esc::config::RunConfig* rc) {
  using namespace esc;
  CtSimConfig cfg;
  if (!o.figure.empty()) {
    if (o.figure == "scalar") cfg = golden::scalar_ct_figure().config;
    else if (o.figure == "scalar-tv") cfg = golden::scalar_ct_uncertain_figure().config;
    else if (o.figure == "planar") cfg = golden::planar_ct_figure().config;
    else throw ConfigError("unknown figure '" + o.figure + "' (scalar, scalar-tv, planar)");
  } else if (rc) {
    if (!rc->map || !rc->dither || !rc->gains) throw ConfigError("simulate-ct needs map, dither and gains");
    cfg = CtSimConfig{*rc->map, *rc->dither, *rc->gains, rc->sim.theta_hat0, rc->sim.t_end, rc->sim.step, {}};
  } else {
    throw ConfigError("simulate-ct needs --config or --figure");
  }
  if (o.t_end > 0.0) cfg.t_end = o.t_end;
  Trajectory tr = simulate_ct(cfg);
  if (o.diagnostics || (rc && rc->sim.diagnostics))
    compute_transformation_ct(tr, cfg.dither, cfg.gains, cfg.map);
  std::ostringstream os;
  config::write_csv(os, tr, o.stride);
  emit(o.out, os.str());
  return 0;
}

int simulate_dt(const Options& o, const esc::config::RunConfig* rc) {
  using namespace esc;
  DtSimConfig cfg;
  if (!o.figure.empty()) {
    if (o.figure == "scalar") cfg = golden::scalar_dt_figure().config;
    else if (o.figure == "scalar-tv") cfg = golden::scalar_dt_uncertain_figure().config;
    else if (o.figure == "planar") cfg = golden::planar_dt_figure().config;
    else throw ConfigError("unknown figure '" + o.figure + "' (scalar, scalar-tv, planar)");
  } else if (rc) {
    if (!rc->map || !rc->dither || !rc->gains) throw ConfigError("simulate-dt needs map, dither and gains");
    cfg = DtSimConfig{*rc->map, *rc->dither, *rc->gains, rc->sim.epsilon, rc->sim.theta_hat0, rc->sim.k_end, {}};
  } else {
    throw ConfigError("simulate-dt needs --config or --figure");
  }
  if (o.k_end > 0) cfg.k_end = o.k_end;
  if (o.epsilon > 0.0) cfg.epsilon = o.epsilon;
  DtTrajectory tr = simulate_dt(cfg);
  if (o.diagnostics || (rc && rc->sim.diagnostics))
    compute_transformation_dt(tr, cfg.dither, cfg.gains, cfg.map);
  std::ostringstream os;
  config::write_csv(os, tr, o.stride);
  emit(o.out, os.str());
  return 0;
}

// ---------------------------------------------------------------------------
// tables and identities

int tables(const Options& o, const esc::config::RunConfig* rc) {
  std::vector<int> which = o.which;
  if (which.empty() && rc) which = rc->tables;
  if (which.empty()) which = esc::golden::known_tables();
  std::vector<esc::TableResult> results;
  for (int t : which) results.push_back(esc::reproduce_table(t));
  if (!o.out.empty() && o.out != "-") {
    std::filesystem::create_directories(o.out);
    for (const auto& r : results) emit((std::filesystem::path(o.out) / ("table" + std::to_string(r.table) + ".csv")).string(), r.csv);
  } else {
    for (const auto& r : results) std::cout << "# table " << r.table << "\n" << r.csv;
  }
  for (const auto& r : results) {
    int pass = 0, fail = 0, na = 0;
    for (const auto& row : r.rows) (row.computed ? (row.pass ? pass : fail) : na)++;
    std::cerr << "table " << r.table << ": " << (r.passed() ? "PASS" : "FAIL") << " (" << pass << " pass, " << fail
              << " fail, " << na << " external baseline)\n";
  }
  return 0;
}

int identities(const Options& o) {
  using namespace esc;
  const int n = o.n > 0 ? o.n : 1;
  std::vector<DitherSpec> specs;
  if (o.T > 0) {
    specs.push_back(discrete_dither(Vector(static_cast<std::size_t>(n), 1.0), o.T));
  } else {
    specs.push_back(continuous_dither(Vector(static_cast<std::size_t>(n), 1.0), o.epsilon > 0.0 ? o.epsilon : 1.0));
  }
  std::mt19937_64 rng(seed_of(o, nullptr));
  for (int i = 0; i < o.random; ++i)
    specs.push_back(random_dither(o.T > 0 ? TimeBase::discrete : TimeBase::continuous, static_cast<std::size_t>(n),
                                  rng, std::max(o.T, 2 * n + 1)));
  json arr = json::array();
  double worst = 0.0;
  for (const auto& d : specs) {
    const DitherIdentityReport r = dither_identities(d);
    worst = std::max(worst, r.worst());
    arr.push_back({{"dither", config::to_json(d)}, {"report", config::to_json(r)}});
  }
  emit(o.out, json{{"dithers", arr}, {"worst", worst}}.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extremum-seeking simulation and practical-stability certification"};
  app.require_subcommand(0, 1);
  Options o;
  app.add_option("-c,--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("-o,--out", o.out, "output file (directory for tables); stdout when empty");
  app.add_option("--seed", o.seed, "RNG seed (overrides ES_CERTIFY_SEED)");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("-o,--out", o.out, "output path");
    sub->add_option("--seed", o.seed, "RNG seed (overrides ES_CERTIFY_SEED)");
  };

  auto* sim_ct = app.add_subcommand("simulate-ct", "continuous-time ES trajectory CSV");
  auto* sim_dt = app.add_subcommand("simulate-dt", "discrete-time ES trajectory CSV");
  for (auto* sub : {sim_ct, sim_dt}) {
    add_common(sub);
    sub->add_option("--figure", o.figure, "published simulation: scalar, scalar-tv, planar");
    sub->add_flag("--diagnostics", o.diagnostics, "append |G|, |Y1|, |Y2|, |z| columns");
    sub->add_option("--stride", o.stride, "write every stride-th row");
  }
  sim_ct->add_option("--t-end", o.t_end, "horizon override");
  sim_dt->add_option("--k-end", o.k_end, "horizon override");
  sim_dt->add_option("--epsilon", o.epsilon, "step size override");

  auto* cert_ct = app.add_subcommand("certify-ct", "continuous-time certificate JSON");
  auto* cert_dt = app.add_subcommand("certify-dt", "discrete-time certificate JSON");
  for (auto* sub : {cert_ct, cert_dt}) {
    add_common(sub);
    sub->add_option("--route", o.route, "theorem1|corollary1|remark3 or theorem2|corollary2|scalar");
    sub->add_option("--epsilon", o.epsilon, "operating epsilon (default epsilon*)");
    sub->add_option("--sweep", o.sweep, "envelope sweep draws");
    sub->add_option("--check", o.check, "re-verify a certificate JSON")->check(CLI::ExistingFile);
  }
  const esc::WarningSink previous = esc::set_warning_sink([](const std::string&) {});
  for (int t : esc::golden::known_tables())
    for (const auto& row : esc::golden::table_rows(t)) {
      if (!row.computed) continue;
      const std::string name = "table" + std::to_string(t) + "-row" + std::to_string(row.row);
      o.presets[name] = false;
      (row.mode == esc::Mode::ct ? cert_ct : cert_dt)
          ->add_flag("--" + name, o.presets[name], "problem of " + name);
    }

  esc::set_warning_sink(previous);

  auto* tab = app.add_subcommand("tables", "reproduce reference tables as CSV");
  add_common(tab);
  tab->add_option("--which", o.which, "table numbers (default all)")->delimiter(',');

  auto* ids = app.add_subcommand("identities", "dither identity deviation report");
  add_common(ids);
  ids->add_option("--n", o.n, "dimension");
  ids->add_option("--T", o.T, "discrete period (continuous when absent)");
  ids->add_option("--epsilon", o.epsilon, "continuous period");
  ids->add_option("--random", o.random, "additional random dithers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    std::optional<esc::config::RunConfig> rc;
    if (!o.config_path.empty()) rc = esc::config::parse_run_config(esc::config::load_json(o.config_path));
    std::string mode;
    if (auto subs = app.get_subcommands(); !subs.empty()) mode = subs.front()->get_name();
    if (mode.empty()) {
      if (!rc) throw esc::ConfigError("give a subcommand or --config");
      mode = rc->mode;
    } else if (rc && rc->mode != mode) {
      throw esc::ConfigError("config mode '" + rc->mode + "' does not match subcommand '" + mode + "'");
    }
    if (rc && o.out.empty()) o.out = rc->output;
    const esc::config::RunConfig* cfg = rc ? &*rc : nullptr;
    if ((mode == "certify-ct" || mode == "certify-dt") && !o.check.empty()) return check_certificate(o);
    if (mode == "certify-ct") return certify_ct(o, cfg);
    if (mode == "certify-dt") return certify_dt(o, cfg);
    if (mode == "simulate-ct") return simulate_ct(o, cfg);
    if (mode == "simulate-dt") return simulate_dt(o, cfg);
    if (mode == "tables") return tables(o, cfg);
    if (mode == "identities") return identities(o);
    throw esc::ConfigError("unknown mode '" + mode + "'");
  } catch (const esc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const esc::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const esc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}
