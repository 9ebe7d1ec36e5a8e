#include <gtest/gtest.h>

#include <cmath>

#include "pfld/schedule.hpp"

using namespace pfld;

TEST(Schedule, SingleStepDegenerate) {
  const auto s = DiffusionSchedule::linear(1, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(s.alpha_bar(0), 1.0);
  EXPECT_DOUBLE_EQ(s.alpha_bar(1), 0.5);
  EXPECT_DOUBLE_EQ(s.sigma_tilde(1), 0.0);
}

TEST(Schedule, TwoStepProduct) {
  const auto s = DiffusionSchedule::linear(2, 0.1, 0.1);
  EXPECT_DOUBLE_EQ(s.alpha_bar(0), 1.0);
  EXPECT_NEAR(s.alpha_bar(1), 0.9, 1e-15);
  EXPECT_NEAR(s.alpha_bar(2), 0.81, 1e-15);
  EXPECT_NEAR(s.alpha(2), 0.9, 1e-15);
}

TEST(Schedule, LongScheduleMatchesExtendedPrecisionProduct) {
  const int T = 1000;
  const auto s = DiffusionSchedule::linear(T, 1e-4, 0.02);
  long double prod = 1.0L;
  for (int t = 1; t <= T; ++t) {
    const long double beta = 1e-4L + (0.02L - 1e-4L) * static_cast<long double>(t - 1) / (T - 1);
    prod *= 1.0L - beta;
    ASSERT_NEAR(s.beta(t), static_cast<double>(beta), 1e-15);
  }
  EXPECT_NEAR(s.alpha_bar(T) / static_cast<double>(prod), 1.0, 1e-10);
}

TEST(Schedule, MarginalCoefficients) {
  const auto s2 = DiffusionSchedule::linear(2, 0.1, 0.1);
  EXPECT_DOUBLE_EQ(s2.marginal(0).signal_scale, 1.0);
  EXPECT_DOUBLE_EQ(s2.marginal(0).noise_scale, 0.0);
  EXPECT_NEAR(s2.marginal(2).signal_scale, 0.9, 1e-15);
  EXPECT_NEAR(s2.marginal(2).noise_scale, std::sqrt(0.19), 1e-15);

  const auto s = DiffusionSchedule::linear(1000, 1e-4, 0.02);
  EXPECT_GE(s.marginal(1000).noise_scale, 0.999);
}

TEST(Schedule, Invariants) {
  const auto s = DiffusionSchedule::linear(1000, 1e-4, 0.02);
  for (int t = 1; t <= s.steps(); ++t) {
    ASSERT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
    ASSERT_GT(s.alpha_bar(t), 0.0);
    const double expected = s.beta(t) * (1 - s.alpha_bar(t - 1)) / (1 - s.alpha_bar(t));
    ASSERT_NEAR(s.sigma_tilde(t) * s.sigma_tilde(t), expected, 1e-15);
    ASSERT_LE(s.sigma_tilde(t), std::sqrt(s.beta(t)));
  }
}

TEST(Schedule, BetaVariance) {
  const auto s = DiffusionSchedule::linear(10, 0.01, 0.05, AncestralVariance::kBeta);
  for (int t = 1; t <= 10; ++t) EXPECT_DOUBLE_EQ(s.sigma_tilde(t), std::sqrt(s.beta(t)));
}

TEST(Schedule, RejectsInvalid) {
  EXPECT_THROW(DiffusionSchedule::linear(0, 1e-4, 0.02), InvalidArgument);
  EXPECT_THROW(DiffusionSchedule::linear(10, 0.0, 0.02), InvalidArgument);
  EXPECT_THROW(DiffusionSchedule::linear(10, 0.02, 0.01), InvalidArgument);
  EXPECT_THROW(DiffusionSchedule::linear(10, 1e-4, 1.0), InvalidArgument);
  EXPECT_THROW(DiffusionSchedule::from_betas({0.1, 1.5}), InvalidArgument);
  const auto s = DiffusionSchedule::linear(10, 1e-4, 0.02);
  EXPECT_THROW(s.beta(0), InvalidArgument);
  EXPECT_THROW(s.alpha_bar(11), InvalidArgument);
}

TEST(Schedule, FromBetas) {
  const auto s = DiffusionSchedule::from_betas({0.1, 0.2, 0.3});
  EXPECT_NEAR(s.alpha_bar(3), 0.9 * 0.8 * 0.7, 1e-15);
}
