#include <cmath>

#include <gtest/gtest.h>

#include "kwidth/bounds.hpp"
#include "kwidth/check.hpp"
#include "kwidth/spectrum.hpp"

using namespace kwidth;

TEST(ReluAlphaLower, Examples) {
  const auto c = relu_alpha_lower(11, 0, {1, 1024});
  EXPECT_NEAR(c.values[0], 1.0 / 11, 1e-16);
  EXPECT_NEAR(c.values[1], 1.0 / 22, 1e-16);
  EXPECT_EQ(c.direction, BoundDirection::lower);
  for (int d : {3, 8, 40}) EXPECT_DOUBLE_EQ(relu_alpha_lower(d, 0, {1}).values[0], 1.0 / d);

  const std::vector<std::uint64_t> ms{1u << 10, 1u << 20};
  const auto r = relu_alpha_lower(21, 1, ms);
  const double slope = std::log(r.values[1] / r.values[0]) / std::log(1024.0);
  EXPECT_NEAR(slope, -3.0 / 20, 1e-14);
  EXPECT_NE(r.validity.find("uncertified"), std::string::npos);
  EXPECT_THROW(relu_alpha_lower(2, 0, ms), DomainError);
}

TEST(SmoothUpper, Examples) {
  const auto c = smooth_upper(10, {10, 1000});
  EXPECT_DOUBLE_EQ(c.values[0], 1.0);
  EXPECT_DOUBLE_EQ(c.values[1], 0.01);
  EXPECT_EQ(c.direction, BoundDirection::upper);
}

TEST(ArctanUpper, Examples) {
  EXPECT_DOUBLE_EQ(arctan_upper_exponent(1.0), 0.5);
  EXPECT_DOUBLE_EQ(arctan_upper_exponent(0.5), 0.5);
  EXPECT_DOUBLE_EQ(arctan_upper_exponent(2.0), 0.25);
  const auto c = arctan_upper(5, 10.0, {1000000});
  EXPECT_NEAR(c.values[0], 625.0 * 100.0 * std::pow(1e6, -0.01), 1e-10);
  EXPECT_THROW(arctan_upper_exponent(0.0), DomainError);
}

TEST(QFactor, Examples) {
  EXPECT_DOUBLE_EQ(q_factor(1.0, 3), 4.0);
  EXPECT_DOUBLE_EQ(q_factor(0.0, 7), 1.0);
  // (d + 1)^{3/(d - 1)} stays bounded as d grows.
  double worst = 0.0;
  for (int d = 10; d <= 100000; d *= 10) worst = std::max(worst, q_factor(3.0 / (d - 1), d));
  EXPECT_LT(worst, 3.0);
  EXPECT_LT(q_factor(3.0 / 99999, 100000), 1.001);
}

TEST(SmoothMuUpper, Examples) {
  EXPECT_NEAR(smooth_mu_upper(3, 0, 1.0), 1.0, 1e-15);
  // Default envelope is k!.
  EXPECT_NEAR(smooth_mu_upper(4, 3), smooth_mu_upper(4, 3, 6.0), 1e-15 * smooth_mu_upper(4, 3, 6.0));
  EXPECT_THROW(smooth_mu_upper(3, 1, 0.0), DomainError);
}

TEST(SmoothMuUpper, DominatesSinCos) {
  const auto r = check::lemma4_domination({3, 10}, 30);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(Regimes, AreNotesOnly) {
  const auto notes = smooth_large_r_regimes();
  ASSERT_EQ(notes.size(), 2u);
  for (const auto& n : notes) {
    EXPECT_FALSE(n.regime.empty());
    EXPECT_FALSE(n.claim.empty());
  }
}

TEST(SmoothRate, SinCosSigmoid) {
  const auto r = check::smooth_rate({Kind::sin, Kind::cos, Kind::sigmoid}, {3, 10}, 10, 10000, 10.0);
  EXPECT_TRUE(r.passed) << r.detail;
}

// Exact small case: for the step at d = 5, eta_1 = (3/4) int_0^1 t (1 - t^2) dt
// = 3/16 and Lambda(5) = 1/4 - 4 (3/16)^2 = 7/64.
TEST(StepDecay, DimensionFiveExact) {
  const auto ks = build_spectrum(ActivationSpec::step(), 5, 10);
  const auto td = trace_decay(ks, {1, 5, 6});
  EXPECT_NEAR(td.lambda_values[0], 0.25, 1e-14);
  EXPECT_NEAR(td.lambda_values[1], 7.0 / 64, 1e-14);
  EXPECT_NEAR(td.lambda_values[2], 0.25 - 5 * 9.0 / 256, 1e-14);
  // The power-law reference with constant 1/d sits above this value.
  EXPECT_GT(relu_alpha_lower(5, 0, {5}).values[0], td.lambda_values[1]);
}
