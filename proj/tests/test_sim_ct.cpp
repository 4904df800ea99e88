#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "esc/cert_ct.hpp"
#include "esc/golden.hpp"
#include "esc/sim_ct.hpp"

using namespace esc;

namespace {

CtSimConfig generic_config() {
  return {make_quadratic_map(0.3, {0.5, -0.5}, Matrix{{2, 0.5}, {0.5, 1}}),
          continuous_dither({1.0, 0.8}, {1, 2}, 1.0),
          GainSpec{{-0.5, -0.4}},
          {1.0, 1.0},
          5.0,
          0.0,
          {}};
}

Vector final_error(CtSimConfig c, double h) {
  c.step = h;
  return simulate_ct(c).theta_tilde.back();
}

}  // namespace

TEST(SimCt, GridAndErrorBookkeeping) {
  CtSimConfig c = generic_config();
  c.t_end = 1.0;
  const Trajectory tr = simulate_ct(c);
  ASSERT_EQ(tr.size(), 257u);  // h = 1/256
  for (std::size_t m = 0; m < tr.size(); ++m) {
    EXPECT_DOUBLE_EQ(tr.times[m], static_cast<double>(m) / 256.0);
    for (std::size_t i = 0; i < 2; ++i)
      EXPECT_EQ(tr.theta_tilde[m][i], tr.theta_hat[m][i] - c.map.theta_star[i]);
  }
}

TEST(SimCt, StepValidation) {
  CtSimConfig c = generic_config();
  c.step = 1.0 / 32.0;
  EXPECT_THROW(simulate_ct(c), ConfigError);
  c.step = 0.0;
  c.t_end = 0.5;
  EXPECT_THROW(simulate_ct(c), ConfigError);
  c = generic_config();
  c.gains = GainSpec{{-0.5, 0.1}};
  EXPECT_THROW(simulate_ct(c), ConfigError);
  c = generic_config();
  c.hessian_of_t = [](double) { return 1.0; };
  EXPECT_THROW(simulate_ct(c), ConfigError);
}

TEST(SimCt, Deterministic) {
  const CtSimConfig c = generic_config();
  const Trajectory a = simulate_ct(c), b = simulate_ct(c);
  EXPECT_EQ(a.theta_hat, b.theta_hat);
}

TEST(SimCt, FourthOrderConvergence) {
  const CtSimConfig c = generic_config();
  const Vector a = final_error(c, 1.0 / 64), b = final_error(c, 1.0 / 128), d = final_error(c, 1.0 / 256);
  const double ratio = norm2(subtract(a, b)) / norm2(subtract(b, d));
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(SimCt, NonFiniteStateDetected) {
  CtSimConfig c = generic_config();
  c.gains = GainSpec{{-5e3, -5e3}};
  c.theta_hat0 = {50.0, 50.0};
  c.t_end = 50.0;
  EXPECT_THROW(simulate_ct(c), NonFiniteStateError);
}

TEST(SimCt, FirstPeriodEnvelopeFromRest) {
  // theta_hat(0) = theta*, Q* = 0: |theta~(t)| <= eps Delta on [0, eps].
  const auto u = interval_uncertainty(1, 0.0, 2.0, 2.0, 1.0);
  const auto d = golden::scalar_ct_dither(0.021);
  const double delta = scalar_delta(u, golden::scalar_ct_gain(), d, 0.1);
  CtSimConfig c{make_quadratic_map(0.0, {0.0}, Matrix{{2.0}}), d, golden::scalar_ct_gain(), {0.0}, 0.021, 0.0, {}};
  integrate_ct(c, [&](const CtSample& s) { EXPECT_LE(norm2(s.theta_tilde), 0.021 * delta); });
}

TEST(SimCt, TimeVaryingHessianHook) {
  const auto fig = golden::scalar_ct_uncertain_figure(5.0);
  CtSimConfig frozen = fig.config;
  frozen.hessian_of_t = [](double) { return 4.75; };
  const Trajectory a = simulate_ct(frozen);
  CtSimConfig plain = fig.config;
  plain.hessian_of_t = {};
  const Trajectory b = simulate_ct(plain);
  EXPECT_EQ(a.theta_hat.back(), b.theta_hat.back());
  const Trajectory varying = simulate_ct(fig.config);
  EXPECT_NE(varying.theta_hat.back(), b.theta_hat.back());
}

TEST(SimCt, TerminalErrorTable2Row2) {
  // t beyond 5 / delta
  const auto fig = golden::scalar_ct_figure(5.0 / 0.013 + 300.0);
  const Trajectory tr = simulate_ct(fig.config);
  EXPECT_LT(norm2(tr.theta_tilde.back()), 1.5 * 1.9e-4);
}

TEST(SimCt, TerminalErrorTable5) {
  const auto fig = golden::planar_ct_figure();
  const Trajectory tr = simulate_ct(fig.config);
  EXPECT_LT(norm2(tr.theta_tilde.back()), 1.5 * 1.4e-3);
}

TEST(TransformationCt, ZIdentityAndBounds) {
  const auto fig = golden::scalar_ct_figure(0.021 * 60);
  Trajectory tr = simulate_ct(fig.config);
  compute_transformation_ct(tr, fig.config.dither, fig.config.gains, fig.config.map);
  const auto& dg = *tr.diagnostics;
  // Along this run |theta~| < sigma = 3.3, so |G| < eps Delta / 2.
  const auto u = interval_uncertainty(1, 0.0, 2.0, 2.0, 2.14);
  const Deltas ds = compute_deltas_ct(u, fig.config.gains, fig.config.dither, 3.3);
  for (std::size_t r = 0; r < dg.z.size(); ++r) {
    const std::size_t m = dg.first_index + r;
    EXPECT_NEAR(dg.z[r][0] + dg.G[r][0], tr.theta_tilde[m][0], 1e-15 * (1.0 + std::abs(tr.theta_tilde[m][0])));
    EXPECT_LT(norm2(dg.G[r]), 0.021 * ds.D / 2.0);
    EXPECT_LT(norm2(dg.Y1[r]), 0.021 * ds.D * ds.D2);
    EXPECT_LT(norm2(dg.Y2[r]), 0.021 * ds.D * ds.D3);
  }
}

TEST(TransformationCt, ResidualHalvesQuadratically) {
  for (const auto& fig : {golden::scalar_ct_figure(), golden::planar_ct_figure()}) {
    CtSimConfig c = fig.config;
    c.t_end = 40.0 * c.dither.epsilon;
    auto residual = [&](double h) {
      c.step = h;
      Trajectory tr = simulate_ct(c);
      compute_transformation_ct(tr, c.dither, c.gains, c.map);
      return residual_ct(tr, c.gains, c.map).max();
    };
    const double ratio = residual(c.dither.epsilon / 64) / residual(c.dither.epsilon / 128);
    EXPECT_GT(ratio, 3.5) << fig.name;
    EXPECT_LT(ratio, 4.5) << fig.name;
  }
}

TEST(TransformationCt, ResidualSmallRelativeToDerivative) {
  const auto fig = golden::scalar_ct_figure(0.021 * 60);
  Trajectory tr = simulate_ct(fig.config);
  compute_transformation_ct(tr, fig.config.dither, fig.config.gains, fig.config.map);
  double dmax = 0.0;
  for (const auto& v : tr.theta_tilde_dot) dmax = std::max(dmax, norm2(v));
  EXPECT_LT(residual_ct(tr, fig.config.gains, fig.config.map).max(), 1e-3 * dmax);
}

TEST(TransformationCt, FrozenStateGivesZeroTerms) {
  // A hand-built trajectory with theta~' = 0: G = Y1 = Y2 = 0, z = theta~.
  Trajectory tr;
  tr.step = 0.25;
  for (int m = 0; m <= 40; ++m) {
    tr.times.push_back(0.25 * m);
    tr.theta_hat.push_back({0.7});
    tr.theta_tilde.push_back({0.7});
    tr.y.push_back(0.0);
    tr.theta_tilde_dot.push_back({0.0});
  }
  const auto d = continuous_dither({1.0}, 2.0);
  const GainSpec g{{-1.0}};
  const auto map = make_quadratic_map(0.0, {0.0}, Matrix{{1.0}});
  compute_transformation_ct(tr, d, g, map);
  for (std::size_t r = 0; r < tr.diagnostics->z.size(); ++r) {
    EXPECT_EQ(tr.diagnostics->G[r][0], 0.0);
    EXPECT_EQ(tr.diagnostics->Y1[r][0], 0.0);
    EXPECT_EQ(tr.diagnostics->Y2[r][0], 0.0);
    EXPECT_EQ(tr.diagnostics->z[r][0], 0.7);
  }
}

TEST(TransformationCt, RequiresIntegerStepRatio) {
  CtSimConfig c = generic_config();
  c.step = 1.0 / 100.5;
  Trajectory tr = simulate_ct(c);
  EXPECT_THROW(compute_transformation_ct(tr, c.dither, c.gains, c.map), ConfigError);
  EXPECT_THROW(residual_ct(tr, c.gains, c.map), InsufficientHistoryError);
}
