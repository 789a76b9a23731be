#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "demodrive/errors.hpp"
#include "demodrive/reward.hpp"

using namespace demodrive;

TEST(Reward, AnchorCases) {
  const RewardParams p;
  EXPECT_NEAR(compute_reward(0.10, 0.10, p), 1.0, 1e-12);
  EXPECT_EQ(compute_reward(0.005, 0.10, p), 0.0);
  EXPECT_NEAR(compute_reward(0.05, 0.02, p), 0.35, 1e-12);
  EXPECT_NEAR(compute_reward(0.25, 0.05, p), 0.75, 1e-12);
}

TEST(Reward, CutoffUsesNormalizedComponents) {
  const RewardParams p;
  // R_s = 0.09 < 0.1 even though R_d saturates.
  EXPECT_EQ(compute_reward(0.10, 0.009, p), 0.0);
  // The reward switches on as R_d crosses 0.1 (0.01 / 0.1 itself rounds just below it).
  EXPECT_EQ(compute_reward(0.0099999, 0.10, p), 0.0);
  EXPECT_NEAR(compute_reward(0.0100001, 0.10, p), 0.5 * 0.100001 + 0.5, 1e-12);
}

TEST(Reward, NegativeInputsClampToZero) {
  const RewardParams p;
  EXPECT_EQ(compute_reward(-0.02, 0.10, p), 0.0);
  EXPECT_EQ(compute_reward(0.10, -1.0, p), 0.0);
}

TEST(Reward, NonFiniteRejected) {
  const RewardParams p;
  EXPECT_THROW(compute_reward(NAN, 0.1, p), ArgumentError);
  EXPECT_THROW(compute_reward(0.1, INFINITY, p), ArgumentError);
}

TEST(Reward, RangeAndMonotonicity) {
  const RewardParams p;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-0.05, 0.3), v(-0.05, 0.3), step(0.0, 0.02);
  for (int i = 0; i < 20000; ++i) {
    const double dd = d(rng), vv = v(rng);
    const double r = compute_reward(dd, vv, p);
    ASSERT_GE(r, 0.0);
    ASSERT_LE(r, 1.0);
    if (r > 0.0) {
      EXPECT_GE(compute_reward(dd + step(rng), vv, p), r);
      EXPECT_GE(compute_reward(dd, vv + step(rng), p), r);
    }
  }
}

TEST(Reward, WeightIdentity) {
  RewardParams p;
  p.distance_weight = 1.0;
  p.speed_weight = 0.0;
  for (double d : {0.011, 0.03, 0.07, 0.1, 0.2}) EXPECT_NEAR(compute_reward(d, 0.05, p), std::min(1.0, d / 0.1), 1e-12);
}

TEST(Reward, DiscontinuitiesOnlyAtCutoff) {
  const RewardParams p;
  // Scan D at fixed V: the only jump larger than the slope allows is at D = 0.01.
  double prev = compute_reward(0.0, 0.1, p);
  const double h = 1e-5;
  for (double dd = h; dd < 0.2; dd += h) {
    const double r = compute_reward(dd, 0.1, p);
    if (std::abs(r - prev) > 0.5 * h / 0.1 + 1e-9) EXPECT_NEAR(dd, 0.01, h);
    prev = r;
  }
}

TEST(RewardEvents, Threshold) {
  const RewardParams p;
  EXPECT_TRUE(is_reward_event(1.0, p));
  EXPECT_FALSE(is_reward_event(0.0, p));
  EXPECT_TRUE(is_reward_event(0.9, p));
  EXPECT_FALSE(is_reward_event(std::nextafter(0.9, 0.0), p));
}

TEST(RewardEvents, Count) {
  const RewardParams p;
  const std::vector<double> r{1.0, 0.35, 0.95};
  EXPECT_EQ(count_events(r, p), 2u);
  EXPECT_EQ(count_events(std::vector<double>{}, p), 0u);
}

TEST(RewardParamsTest, Validation) {
  RewardParams p;
  EXPECT_NO_THROW(p.validate());
  p.distance_weight = 0.6;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = {};
  p.event_threshold = 0.05;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = {};
  p.cutoff = 1.0;
  EXPECT_THROW(p.validate(), ArgumentError);
  p = {};
  p.ideal_speed = 0.0;
  EXPECT_THROW(p.validate(), ArgumentError);
}

TEST(RewardParamsTest, JsonRoundTripAndUnknownKey) {
  RewardParams p;
  p.event_threshold = 0.95;
  p.ideal_speed = 0.12;
  const nlohmann::json j = p;
  EXPECT_EQ(j.get<RewardParams>(), p);
  nlohmann::json bad = j;
  bad["rho"] = 0.9;
  EXPECT_THROW(bad.get<RewardParams>(), ValidationError);
}
