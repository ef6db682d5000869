#include <gtest/gtest.h>

#include <cmath>

#include "emberops/env.hpp"
#include "emberops/errors.hpp"
#include "test_support.hpp"

using namespace emberops;
using namespace emberops::testing;

namespace {

std::vector<int> random_actions(RngStream& rng, int n) {
  std::vector<int> a(static_cast<std::size_t>(n));
  for (int& x : a) x = static_cast<int>(uniform01(rng) * kTacticCount);
  return a;
}

RegionMaxima unit_maxima() { return {1.0, 1.0, 1.0, 1.0}; }

}  // namespace

TEST(Observation, LengthIsSixteenPlusSixPerAircraft) {
  EXPECT_EQ(observation_size(2), 28);
  WildfireEnv env(bundled_scenario());
  EXPECT_EQ(env.reset(1).size(), 28u);
}

TEST(Reset, DetectionDelayLeavesBurntGround) {
  WildfireEnv env(bundled_scenario());
  const StateVector s = env.reset(5);
  EXPECT_GT(env.stats().burnt_fraction, 0.0);
  EXPECT_GT(s[7], 0.0);
  EXPECT_EQ(env.minute(), bundled_scenario().episode.detection_delay_min);
}

TEST(Reset, SameSeedSameInitialState) {
  WildfireEnv a(bundled_scenario()), b(bundled_scenario());
  EXPECT_EQ(a.reset(9), b.reset(9));
  EXPECT_TRUE(a.map() == b.map());
  a.reset(10);
  b.reset(9);
  b.reset(10);
  EXPECT_TRUE(a.map() == b.map());
}

TEST(Reset, ZeroDelayLeavesOnlyTheIgnitionCell) {
  Scenario s = bundled_scenario();
  s.episode.detection_delay_min = 0;
  WildfireEnv env(s);
  env.reset(3);
  int early = 0, other = 0;
  for (const Cell& c : env.map().cells) {
    early += c.phase == BurnPhase::EarlyBurning;
    other += c.phase == BurnPhase::FullBurning || c.phase == BurnPhase::Extinguishing || c.phase == BurnPhase::Burnt;
  }
  EXPECT_EQ(early, 1);
  EXPECT_EQ(other, 0);
  EXPECT_EQ(env.map().at(s.ignition).phase, BurnPhase::EarlyBurning);
  EXPECT_DOUBLE_EQ(env.moe(), 1.0);
}

TEST(Reset, AircraftStartParkedAndEmpty) {
  WildfireEnv env(bundled_scenario());
  const StateVector s = env.reset(2);
  for (int i = 0; i < env.fleet_size(); ++i) {
    const std::size_t o = kEnvironmentFeatures + kAircraftFeatures * static_cast<std::size_t>(i);
    EXPECT_EQ(s[o + 2], 0.0);  // altitude
    EXPECT_EQ(s[o + 3], 0.0);  // payload flag
    EXPECT_EQ(s[o + 4], 1.0);  // propellant
    EXPECT_EQ(s[o + 5], 1.0);  // return margin at the airport
  }
}

TEST(Moe, AlgebraicAnchors) {
  EXPECT_DOUBLE_EQ(compute_moe({}, unit_maxima(), false), 1.0);
  EXPECT_DOUBLE_EQ(compute_moe({1.0, 1.0, 1.0, 1.0}, unit_maxima(), true), -1.0);
  EXPECT_DOUBLE_EQ(compute_moe({0.5, 0.5, 0.5, 0.5}, unit_maxima(), false), 0.5);
  EXPECT_DOUBLE_EQ(compute_moe({1.0, 0.0, 0.0, 0.0}, unit_maxima(), false), 0.75);
}

TEST(Moe, RatioAboveOneRejected) {
  EXPECT_THROW(compute_moe({2.0, 0.0, 0.0, 0.0}, unit_maxima(), false), MaximaViolation);
  EXPECT_THROW(compute_moe({0.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 1.0, 1.0}, false), MaximaViolation);
}

TEST(MoeProperty, FuzzedLedgersStayInRange) {
  RngStream rng(17);
  const RegionMaxima mx{3.0, 5.0, 7.0, 11.0};
  for (int i = 0; i < 10000; ++i) {
    const DamageLedger d{uniform01(rng) * 3.0, uniform01(rng) * 5.0, uniform01(rng) * 7.0, uniform01(rng) * 11.0};
    const bool oob = uniform01(rng) < 0.3;
    const double moe = compute_moe(d, mx, oob);
    ASSERT_GE(moe, -1.0);
    ASSERT_LE(moe, 1.0);
    const double oracle = 1.0 - (d.burnt_area / 3.0 + d.cost / 5.0 + d.emissions / 7.0 + d.casualties / 11.0) / 4.0;
    ASSERT_NEAR(moe, oob ? oracle - 1.0 : oracle, 1e-12);
  }
}

TEST(Step, ErrorsBeforeResetAndAfterDone) {
  WildfireEnv env(bundled_scenario());
  const std::vector<int> a{0, 0};
  EXPECT_THROW(env.step(a), NotInitialized);
  EXPECT_THROW(env.observe(), NotInitialized);
  env.reset(4);
  EXPECT_THROW(env.step(std::vector<int>{0}), InvalidAction);
  EXPECT_THROW(env.step(std::vector<int>{0, 24}), InvalidAction);
  EXPECT_THROW(env.step(std::vector<int>{-1, 0}), InvalidAction);
  while (!env.done()) env.step(a);
  EXPECT_THROW(env.step(a), EpisodeFinished);
}

TEST(StepProperty, RewardsTelescopeAndStayNonPositiveInBounds) {
  WildfireEnv env(bundled_scenario());
  RngStream rng(8);
  for (int ep = 0; ep < 20; ++ep) {
    StateVector s = env.reset(hash64(77, static_cast<std::uint64_t>(ep)));
    const double m0 = env.moe();
    double sum = 0.0;
    int steps = 0;
    while (!env.done()) {
      const StepResult r = env.step(random_actions(rng, env.fleet_size()));
      sum += r.reward;
      ++steps;
      for (double v : r.next_state) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }
      ASSERT_EQ(r.next_state.size(), 28u);
      if (r.termination != Termination::OutOfBound) {
        ASSERT_LE(r.reward, 0.0);
      }
      ASSERT_GE(r.moe, -1.0);
      ASSERT_LE(r.moe, 1.0);
      if (r.termination == Termination::OutOfBound) {
        ASSERT_LE(r.moe, 0.0);
      }
      if (r.termination == Termination::Contained) {
        ASSERT_EQ(env.stats().active_front_count, 0);
      }
      if (!r.done) {
        ASSERT_GT(env.stats().active_front_count, 0);
      }
    }
    EXPECT_LE(steps, 96);
    EXPECT_NEAR(sum, env.moe() - m0, 1e-9);
  }
}

TEST(StepProperty, ReplayIsDeterministic) {
  auto run = [](std::uint64_t seed) {
    WildfireEnv env(bundled_scenario());
    RngStream rng(seed ^ 0xABCDu);
    std::vector<StateVector> states{env.reset(seed)};
    std::vector<double> rewards;
    while (!env.done()) {
      const StepResult r = env.step(random_actions(rng, env.fleet_size()));
      states.push_back(r.next_state);
      rewards.push_back(r.reward);
    }
    return std::make_tuple(states, rewards, env.map(), env.ledger());
  };
  for (std::uint64_t seed : {1u, 2u, 3u}) EXPECT_EQ(run(seed), run(seed));
}

TEST(StepProperty, FireReachingTheEdgeEndsTheEpisode) {
  // Large fire, no useful suppression: the run ends at the boundary.
  Scenario s = bundled_scenario();
  s.spread.base_ignition_prob = 1.0;
  WildfireEnv env(s);
  env.reset(6);
  while (!env.done()) env.step(std::vector<int>{7, 7});
  EXPECT_EQ(env.termination(), Termination::OutOfBound);
  EXPECT_TRUE(env.out_of_bound());
  const double damage_only = compute_moe(env.ledger(), s.maxima, false);
  EXPECT_DOUBLE_EQ(env.moe(), damage_only - 1.0);
}

TEST(Termination, StringRoundTrip) {
  for (Termination t : {Termination::Running, Termination::Contained, Termination::TimeLimit, Termination::OutOfBound})
    EXPECT_EQ(termination_from_string(to_string(t)), t);
  EXPECT_THROW(termination_from_string("burning"), ParseError);
}
