#include <cmath>

#include <gtest/gtest.h>

#include "kwidth/check.hpp"
#include "kwidth/experiment.hpp"

using namespace kwidth;

TEST(SampleSphere, NormsAndMoments) {
  const int d = 7, n = 40000;
  const auto x = sample_sphere(d, n, 11);
  ASSERT_EQ(x.rows(), n);
  ASSERT_EQ(x.cols(), d);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(x.row(i).norm(), 1.0, 1e-12);
  const double tol = 5.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < d; ++j) EXPECT_NEAR(x.col(j).mean(), 0.0, tol);
  EXPECT_NEAR(x.col(0).array().square().mean(), 1.0 / d, tol);
  EXPECT_TRUE(check::sphere_sampling(10, 20000).passed);
}

TEST(SampleSphere, DeterministicAndStreamed) {
  EXPECT_EQ(sample_sphere(5, 100, 3), sample_sphere(5, 100, 3));
  EXPECT_NE(sample_sphere(5, 100, 3), sample_sphere(5, 100, 4));
  auto a = make_stream(9, 2, 1);
  auto b = make_stream(9, 2, 1);
  auto c = make_stream(9, 1, 2);
  EXPECT_EQ(a(), b());
  EXPECT_NE(make_stream(9, 2, 1)(), c());
  EXPECT_THROW(sample_sphere(1, 10, 0), DomainError);
  EXPECT_THROW(sample_sphere(3, 0, 0), DomainError);
}

TEST(RandomFeatureFit, ForcedDirectionIsExact) {
  SeparationConfig cfg;
  cfg.dimension = 8;
  cfg.target = ActivationSpec::relu(1);
  cfg.feature_count = 1;
  cfg.force_direction = true;
  cfg.trials = 3;
  cfg.seed = 5;
  const auto rep = random_feature_fit(cfg);
  for (double e : rep.errors) EXPECT_LE(e, 1e-20);
}

TEST(RandomFeatureFit, NoFeaturesGivesTargetNorm) {
  SeparationConfig cfg;
  cfg.dimension = 10;
  cfg.feature_count = 0;
  cfg.trials = 5;
  cfg.seed = 1;
  const auto rep = random_feature_fit(cfg);
  EXPECT_NEAR(rep.mean_error, 0.5, 0.05);
  EXPECT_DOUBLE_EQ(rep.lambda_m, 0.5);
}

TEST(RandomFeatureFit, ReportInvariants) {
  SeparationConfig cfg;
  cfg.dimension = 10;
  cfg.feature_count = 32;
  cfg.trials = 6;
  cfg.seed = 17;
  const auto rep = random_feature_fit(cfg);
  ASSERT_EQ(rep.errors.size(), 6u);
  double mean = 0;
  for (double e : rep.errors) {
    EXPECT_GE(e, 0.0);
    mean += e / 6;
  }
  EXPECT_NEAR(rep.mean_error, mean, 1e-15);
  double ss = 0;
  for (double e : rep.errors) ss += (e - mean) * (e - mean);
  EXPECT_NEAR(rep.std_error, std::sqrt(ss / 5) / std::sqrt(6.0), 1e-15);
  EXPECT_TRUE(rep.respects_lower_bound(3.0));
  EXPECT_FALSE(rep.underdetermined);
}

TEST(RandomFeatureFit, Deterministic) {
  SeparationConfig cfg;
  cfg.dimension = 6;
  cfg.feature_count = 16;
  cfg.trials = 4;
  cfg.seed = 77;
  const auto a = random_feature_fit(cfg);
  const auto b = random_feature_fit(cfg);
  EXPECT_EQ(a.errors, b.errors);
  EXPECT_TRUE(check::determinism(6).passed);
}

TEST(RandomFeatureFit, UnderdeterminedIsFlagged) {
  SeparationConfig cfg;
  cfg.dimension = 5;
  cfg.feature_count = 40;
  cfg.train_samples = 20;
  cfg.ridge = 0.0;
  cfg.trials = 2;
  const auto rep = random_feature_fit(cfg);
  EXPECT_TRUE(rep.underdetermined);
  EXPECT_EQ(rep.min_norm_trials, 2);
}

TEST(RandomFeatureFit, Errors) {
  SeparationConfig cfg;
  cfg.trials = 0;
  EXPECT_THROW(random_feature_fit(cfg), DomainError);
  cfg.trials = 1;
  cfg.ridge = -1;
  EXPECT_THROW(random_feature_fit(cfg), DomainError);
}

TEST(Separation, StatisticalInvariantsSmallScale) {
  const auto r = check::separation(8, {8, 16, 32}, 8, 2024, 120.0);
  EXPECT_TRUE(r.passed) << r.detail;
  const auto diag = check::separation_diagnostics(6);
  EXPECT_TRUE(diag.passed) << diag.detail;
}

TEST(HarmonicAverageError, Examples) {
  const auto step = ActivationSpec::step();
  EXPECT_NEAR(harmonic_average_error(2, step, 0, 1 << 16), 0.5, 1e-14);
  const auto mu = fourier_oracle_d2(step, 8, 1 << 16);
  EXPECT_NEAR(harmonic_average_error(2, step, 1, 1 << 16), 0.5 - mu[0], 1e-14);
  EXPECT_THROW(harmonic_average_error(3, step, 1), DomainError);
  EXPECT_THROW(harmonic_average_error(2, step, -1), DomainError);
}

TEST(HarmonicAverageError, MatchesTraceDecay) {
  const auto r = check::harmonic_average({0, 1, 2, 3, 5, 8, 13, 21}, 1 << 20, 1e-8);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(RTrend, ArctanSlopesShrinkWithR) {
  const auto st = r_trend_study(Kind::arctan, 10, {1.0, 2.0, 4.0}, 1000, 3, 10);
  ASSERT_EQ(st.rows.size(), 3u);
  EXPECT_TRUE(st.slope_magnitude_nonincreasing());
  for (const auto& row : st.rows) EXPECT_LT(row.slope, 0.0);
  EXPECT_THROW(r_trend_study(Kind::step, 10, {1.0}, 1000), DomainError);
}
