#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "esc/config.hpp"
#include "esc/golden.hpp"

using namespace esc;
using config::json;

namespace {

json ct_config() {
  return json::parse(R"({
    "mode": "certify-ct",
    "map": {"q_star": 0.0, "theta_star": [0.0], "hessian": [[2.0]]},
    "uncertainty": {"interval": {"n": 1, "h_lo": 2.0, "h_hi": 2.0}, "q_star_max": 0.0},
    "dither": {"amplitudes": [0.1], "epsilon": 0.021},
    "gains": [-0.0065],
    "route": "remark3",
    "cert": {"sigma0": 1.0, "sigma": 1.4142135623730951}
  })");
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(ParseRunConfig, FullCertifyConfig) {
  const config::RunConfig c = config::parse_run_config(ct_config());
  EXPECT_EQ(c.mode, "certify-ct");
  ASSERT_TRUE(c.uncertainty.has_value());
  EXPECT_DOUBLE_EQ(c.uncertainty->h_max, 2.0);
  EXPECT_DOUBLE_EQ(c.uncertainty->sigma0, 1.0);
  EXPECT_EQ(c.dither->base, TimeBase::continuous);
  EXPECT_EQ(c.dither->freq_indices, (std::vector<int>{1}));
  EXPECT_EQ(c.route, "remark3");
}

TEST(ParseRunConfig, Errors) {
  json j = ct_config();
  j["bogus"] = 1;
  EXPECT_THROW(config::parse_run_config(j), ConfigError);
  j = ct_config();
  j["mode"] = "fly";
  EXPECT_THROW(config::parse_run_config(j), ConfigError);
  j = ct_config();
  j.erase("mode");
  EXPECT_THROW(config::parse_run_config(j), ConfigError);
  j = ct_config();
  j["map"]["hessian"] = json::parse("[[1, 2]]");
  EXPECT_THROW(config::parse_run_config(j), DimensionError);
  j = ct_config();
  j["map"]["hessian"] = json::parse("[[-1]]");
  EXPECT_THROW(config::parse_run_config(j), NotPositiveDefiniteError);
  j = ct_config();
  j["dither"].erase("epsilon");
  EXPECT_THROW(config::parse_run_config(j), ConfigError);
  j = ct_config();
  j["mode"] = "certify-dt";
  j["dither"]["period"] = 2.5;
  EXPECT_THROW(config::parse_run_config(j), ConfigError);
  j = ct_config();
  j["gains"] = "fast";
  EXPECT_THROW(config::parse_run_config(j), ConfigError);
  EXPECT_THROW(config::parse_run_config(json::array()), ConfigError);
  EXPECT_THROW(config::load_json("/nonexistent/file.json"), ConfigError);
}

TEST(ParseRunConfig, UncertaintyDefaultsFromMap) {
  json j = ct_config();
  j.erase("uncertainty");
  j["map"]["hessian"] = json::parse("[[100, 30], [30, 20]]");
  j["map"]["theta_star"] = json::parse("[2, 4]");
  j["map"]["q_star"] = -1.0;
  const auto c = config::parse_run_config(j);
  EXPECT_NEAR(c.uncertainty->h_min, 10.0, 1e-12);
  EXPECT_NEAR(c.uncertainty->h_max, 110.0, 1e-12);
  EXPECT_DOUBLE_EQ(c.uncertainty->q_star_max, 1.0);
  EXPECT_FALSE(c.uncertainty->diagonal);
}

TEST(Certificate, RoundTripReverifies) {
  const auto c = config::parse_run_config(ct_config());
  const CtProblem pb = make_ct_problem(CtRoute::remark3, *c.uncertainty, *c.gains, *c.dither);
  const CtCertificate cert = certify_ct(pb, c.cert.sigma0, c.cert.sigma, 0.021);
  const json j = json::parse(config::certificate_json(cert).dump());
  EXPECT_EQ(j.at("route"), "remark3");
  const auto r = config::reverify(j);
  EXPECT_TRUE(r.matches);
  EXPECT_TRUE(r.inequality_holds);
  json tampered = j;
  tampered["ub"] = j.at("ub").get<double>() * 0.5;
  EXPECT_FALSE(config::reverify(tampered).matches);
  tampered = j;
  tampered.erase("problem");
  EXPECT_THROW(config::reverify(tampered), ConfigError);
}

TEST(Certificate, DiscreteTheoremRoundTripKeepsLmi) {
  const auto u = golden::planar_dt_uncertainty();
  const DtProblem pb = make_dt_problem(DtRoute::theorem2, u, golden::planar_dt_gain(), golden::planar_dt_valid_dither(),
                                       0.0, std::nullopt, 0.004);
  const DtCertificate cert = certify_dt(pb, 1.0, std::sqrt(2.0));
  const json j = json::parse(config::certificate_json(cert).dump());
  ASSERT_TRUE(j.at("problem").contains("lmi"));
  const auto r = config::reverify(j);
  EXPECT_TRUE(r.matches);
  EXPECT_TRUE(r.lmi_feasible);
}

TEST(Csv, ContinuousHeaderAndRows) {
  const auto fig = golden::scalar_ct_figure(0.021 * 3);
  Trajectory tr = simulate_ct(fig.config);
  std::ostringstream plain;
  config::write_csv(plain, tr);
  EXPECT_EQ(plain.str().substr(0, plain.str().find('\n')), "t,theta_hat_1,theta_tilde_norm,y");
  EXPECT_EQ(count_lines(plain.str()), tr.size() + 1);
  compute_transformation_ct(tr, fig.config.dither, fig.config.gains, fig.config.map);
  std::ostringstream diag;
  config::write_csv(diag, tr, 10);
  const std::string s = diag.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "t,theta_hat_1,theta_tilde_norm,y,G_norm,Y1_norm,Y2_norm,z_norm");
  EXPECT_NE(s.find(",,,,\n"), std::string::npos);  // rows before the first full period
  EXPECT_EQ(count_lines(s), (tr.size() - 1) / 10 + 1 + 1 + ((tr.size() - 1) % 10 ? 1 : 0));
}

TEST(Csv, DiscreteHeaderAndByteStability) {
  const auto fig = golden::planar_dt_figure(40);
  std::ostringstream a, b;
  config::write_csv(a, simulate_dt(fig.config));
  config::write_csv(b, simulate_dt(fig.config));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "k,theta_hat_1,theta_hat_2,theta_tilde_norm,y");
  EXPECT_NE(a.str().find("\n0,3,3,"), std::string::npos);
}

TEST(Json, LmiRoundTrip) {
  LmiCertificate c{Mode::dt, Matrix{{1, 0.1}, {0.1, 2}}, 2.01, 0.5, 0.01, 0.004, 1e-3};
  const LmiCertificate d = config::lmi_from(config::to_json(c));
  EXPECT_EQ(d.p_norm, c.p_norm);
  EXPECT_EQ(d.mode, Mode::dt);
  EXPECT_DOUBLE_EQ(d.rate, c.rate);
  json bad = config::to_json(c);
  bad["mode"] = "xt";
  EXPECT_THROW(config::lmi_from(bad), ConfigError);
  EXPECT_THROW(config::ct_route_from("theorem2"), ConfigError);
  EXPECT_THROW(config::dt_route_from("remark3"), ConfigError);
}
