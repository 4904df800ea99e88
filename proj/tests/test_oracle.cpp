#include <cmath>
#include <cstdlib>
#include <random>

#include <gtest/gtest.h>

#include "esc/golden.hpp"
#include "esc/oracle.hpp"

using namespace esc;

TEST(Bisect, SquareRootOfTwo) {
  const double r = bisect_inequality([](double x) { return x * x < 2.0; }, 0.0, 2.0, 1e-14);
  EXPECT_NEAR(r, std::sqrt(2.0), 1e-13);
}

TEST(Bisect, RejectsBadBrackets) {
  EXPECT_THROW(bisect_inequality([](double) { return true; }, 0.0, 1.0), ConfigError);
  EXPECT_THROW(bisect_inequality([](double) { return false; }, 0.0, 1.0), ConfigError);
  EXPECT_THROW(bisect_inequality([](double x) { return x < 0.5; }, 1.0, 0.0), ConfigError);
}

TEST(NormSweep, PowersOfScaledIdentity) {
  // ||(0.5 I)^k|| = 0.5^k exactly
  const NormSweep s = norm_power_sweep(Matrix::identity(2) * 0.5, 50, [](long long k) { return std::pow(0.5, k); });
  EXPECT_NEAR(s.max_ratio, 1.0, 1e-12);
  const NormSweep j = norm_power_sweep(Matrix{{0.5, 1.0}, {0.0, 0.5}}, 50, [](long long k) { return std::pow(0.5, k); });
  EXPECT_GT(j.max_ratio, 2.0);  // the Jordan block grows transiently
}

TEST(NormSweep, ExponentialOfDiagonal) {
  const NormSweep s = norm_exp_sweep(Matrix::diagonal(Vector{-1.0, -2.0}), 5.0,
                                     [](double t) { return std::exp(-t); });
  EXPECT_NEAR(s.max_ratio, 1.0, 1e-12);
}

TEST(RandomDraws, InsideTheirSets) {
  std::mt19937_64 rng(kDefaultSeed);
  const auto u = golden::six_uncertainty(0.5, 0.2, 0.8, 3.2);
  for (int i = 0; i < 50; ++i) {
    EXPECT_LE(norm2(random_in_ball(3, 0.7, rng)), 0.7);
    const Matrix dh = random_delta_h(4, 0.3, false, rng);
    EXPECT_LE(spectral_norm(dh), 0.3 + 1e-12);
    EXPECT_LT(asymmetry(dh), 1e-15);
    EXPECT_TRUE(is_diagonal(random_delta_h(4, 0.3, true, rng)));
    const Vector ev = jacobi_eigen(random_hessian(u, rng)).values;
    EXPECT_GE(ev.front(), u.h_min - 1e-12);
    EXPECT_LE(ev.back(), u.h_max + 1e-12);
  }
}

TEST(RandomDraws, DithersSatisfyIdentities) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const DitherSpec d = random_dither(TimeBase::discrete, 3, rng, 8);
    EXPECT_GE(d.period, 7);
    EXPECT_LE(d.period, 8);
    EXPECT_LT(dither_identities(d).worst(), 1e-12);
  }
}

TEST(Seed, EnvironmentOverride) {
  ::unsetenv("ES_CERTIFY_SEED");
  EXPECT_EQ(default_seed(), kDefaultSeed);
  ::setenv("ES_CERTIFY_SEED", "42", 1);
  EXPECT_EQ(default_seed(), 42u);
  auto prev = set_warning_sink([](const std::string&) {});
  ::setenv("ES_CERTIFY_SEED", "abc", 1);
  EXPECT_EQ(default_seed(), kDefaultSeed);
  set_warning_sink(prev);
  ::unsetenv("ES_CERTIFY_SEED");
}

TEST(EnvelopeSweep, QuiescentStartStaysInsideBall) {
  // sigma0 tiny: every draw starts near theta*, the envelope is essentially eps Delta + ball
  auto u = interval_uncertainty(1, 0.0, 2.0, 2.0, 1e-6);
  const CtProblem pb = make_ct_problem(CtRoute::remark3, u, golden::scalar_ct_gain(), golden::scalar_ct_dither());
  const CtCertificate c = certify_ct(pb, 1e-6, 0.5);
  const SweepReport r = envelope_sweep_ct(c, {0.0}, 1, kDefaultSeed);
  EXPECT_TRUE(r.passed());
  EXPECT_GT(r.samples, 1000);
}

TEST(EnvelopeSweep, ScalarRowsHold) {
  const auto row = *golden::find_row(1, 2);
  const CtCertificate c =
      certify_ct(make_ct_problem(CtRoute::remark3, row.uncertainty, row.gains, row.dither), row.sigma0, row.sigma);
  const SweepReport r = envelope_sweep_ct(c, {0.0}, 2, kDefaultSeed);
  EXPECT_TRUE(r.passed()) << r.worst_margin;
  EXPECT_EQ(r.draws, 2);
  const SweepReport again = envelope_sweep_ct(c, {0.0}, 2, kDefaultSeed);
  EXPECT_EQ(again.worst_margin, r.worst_margin);
  EXPECT_EQ(again.digest, r.digest);

  auto dt_row = *golden::find_row(6, 1);
  const DtCertificate d = certify_dt(
      make_dt_problem(DtRoute::scalar, dt_row.uncertainty, dt_row.gains, golden::scalar_dt_sim_dither()),
      dt_row.sigma0, dt_row.sigma);
  EXPECT_TRUE(envelope_sweep_dt(d, {0.0}, 3, kDefaultSeed).passed());
}

TEST(EnvelopeSweep, InflatedRateIsCaught) {
  // A decay rate far above the true one makes the envelope unsound.
  const auto row = *golden::find_row(1, 2);
  const CtProblem pb = make_ct_problem(CtRoute::remark3, row.uncertainty, row.gains, row.dither, 0.5);
  const CtCertificate c = certify_ct(pb, row.sigma0, row.sigma, 0.021);
  const SweepReport r = envelope_sweep_ct(c, {0.0}, 1, kDefaultSeed);
  EXPECT_FALSE(r.passed());
  EXPECT_TRUE(r.violating_index.has_value());
}
