#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

namespace seob {
namespace {

using testing::max_abs_diff;

RunConfig base_config(int players, int actions, double gamma, long horizon) {
  RunConfig cfg;
  cfg.horizon = horizon;
  cfg.schedule = StepSchedule::power(1.0, 0.6);
  cfg.risk_families = FamilyList(static_cast<std::size_t>(players), MarginalFamily::exponential(gamma, actions));
  cfg.belief_families = cfg.risk_families;
  return cfg;
}

TEST(StepSchedule, Values) {
  EXPECT_DOUBLE_EQ(StepSchedule::constant(0.1)(7), 0.1);
  EXPECT_DOUBLE_EQ(StepSchedule::power(2.0, 0.5)(4), 1.0);
  EXPECT_THROW(StepSchedule::power(1.0, 0.5)(0), InvalidInput);
  EXPECT_THROW(StepSchedule::constant(0.0), InvalidInput);
  EXPECT_THROW(StepSchedule::power(1.0, -0.1), InvalidInput);
}

// Partial-sum oracle: S1(T) = sum lambda_t, S2(T) = sum lambda_t^2 at T = 10^4
// and 10^7. A divergent sum keeps growing by a large factor; a vanishing ratio
// keeps shrinking.
struct PartialSums {
  double s1_small = 0, s2_small = 0, s1_large = 0, s2_large = 0;
};

PartialSums partial_sums(const StepSchedule& s) {
  PartialSums r;
  for (long t = 1; t <= 10000000; ++t) {
    const double l = s(t);
    r.s1_large += l;
    r.s2_large += l * l;
    if (t == 10000) {
      r.s1_small = r.s1_large;
      r.s2_small = r.s2_large;
    }
  }
  return r;
}

TEST(ScheduleValidate, Classification) {
  const auto a = schedule_validate(StepSchedule::power(1.0, 0.6));
  EXPECT_TRUE(a.sum_diverges);
  EXPECT_TRUE(a.ratio_vanishes);
  const auto c = schedule_validate(StepSchedule::constant(0.1));
  EXPECT_TRUE(c.sum_diverges);
  EXPECT_FALSE(c.ratio_vanishes);
  const auto b = schedule_validate(StepSchedule::power(1.0, 1.5));
  EXPECT_FALSE(b.sum_diverges);
  const auto z = schedule_validate(StepSchedule::power(1.0, 0.0));
  EXPECT_TRUE(z.sum_diverges);
  EXPECT_FALSE(z.ratio_vanishes);
}

TEST(ScheduleValidate, AgreesWithPartialSums) {
  const auto p06 = partial_sums(StepSchedule::power(1.0, 0.6));
  EXPECT_GT(p06.s1_large / p06.s1_small, 10.0);
  EXPECT_LT((p06.s2_large / p06.s1_large) / (p06.s2_small / p06.s1_small), 0.2);
  const auto p15 = partial_sums(StepSchedule::power(1.0, 1.5));
  EXPECT_LT(p15.s1_large / p15.s1_small, 1.01);
  // For a = 1.5 the ratio settles at zeta(3)/zeta(1.5), not at 0.
  EXPECT_NEAR(p15.s2_large / p15.s1_large, 1.2020569031595942 / 2.6123753486854883, 1e-3);
}

TEST(StepUpdate, Examples) {
  const auto e = MarginalFamily::exponential(1.0, 2);
  const Vector u{{0.3, -0.2}};
  const Vector same = step_update(u, Vector{{0.5, 0.5}}, Vector{{0.5, 0.5}}, 1e-300, e);
  EXPECT_LE(max_abs_diff(same, u), 1e-12);
  const Vector inc = step_update(Vector::Zero(2), Vector{{0.5, 0.5}}, Vector{{0.5, 0.5}}, 1.0, e);
  EXPECT_NEAR(inc[0], 0.5 + std::log(2.0) - 1.0, 1e-15);
  EXPECT_NEAR(inc[0], 0.19315, 1e-5);
  const auto uf = MarginalFamily::uniform(1.0, 2);
  const Vector d = step_update(Vector::Zero(2), Vector::Zero(2), Vector{{0.25, 0.75}}, 1.0, uf);
  EXPECT_NEAR(d[0], 0.0, 1e-15);
  EXPECT_NEAR(d[1], -2.0, 1e-15);
}

TEST(StepUpdate, ClampKeepsIncrementFinite) {
  const auto e = MarginalFamily::exponential(1.0, 2);
  long triggers = 0;
  const Vector d = step_increment(Vector::Zero(2), Vector{{1.0, 0.0}}, 1.0, e, 1e-12, &triggers);
  EXPECT_TRUE(d.allFinite());
  EXPECT_NEAR(d[1], std::log(1e12) - 1.0, 1e-9);
  EXPECT_EQ(triggers, 1);
  EXPECT_THROW(step_update(Vector::Zero(2), Vector::Zero(3), Vector{{0.5, 0.5}}, 1.0, e), InvalidInput);
  EXPECT_THROW(step_update(Vector::Zero(2), Vector::Zero(2), Vector{{0.5, 0.5}}, 0.0, e), InvalidInput);
}

TEST(RunRepeatedGame, ValidatesConfig) {
  const Game g = testing::matching_pennies();
  auto cfg = base_config(2, 2, 3.0, 10);
  cfg.horizon = 0;
  EXPECT_THROW(run_repeated_game(g, cfg), InvalidInput);
  cfg = base_config(2, 2, 3.0, 10);
  cfg.clamp = 0.5;
  EXPECT_THROW(run_repeated_game(g, cfg), InvalidInput);
  cfg = base_config(2, 3, 3.0, 10);
  EXPECT_THROW(run_repeated_game(g, cfg), InvalidInput);
  cfg = base_config(2, 2, 3.0, 10);
  cfg.initial_estimates = {Vector::Zero(2)};
  EXPECT_THROW(run_repeated_game(g, cfg), InvalidInput);
}

TEST(RunRepeatedGame, ColdStartIsUniform) {
  const Game g = testing::random_game(1, 3, 3);
  const auto cfg = base_config(3, 3, 1.0, 1);
  const Trace t = run_repeated_game(g, cfg);
  ASSERT_EQ(t.rounds.size(), 1u);
  EXPECT_EQ(t.rounds[0].round, 1);
  EXPECT_LE(t.rounds[0].profile.distance_inf(StrategyProfile::uniform(3, 3)), 1e-15);
  EXPECT_DOUBLE_EQ(t.rounds[0].step, 1.0);
}

TEST(RunRepeatedGame, RecordsOneRoundAsAlgorithmSteps) {
  // Replay two rounds by hand from the library primitives.
  const Game g = testing::random_game(2, 2, 3);
  auto cfg = base_config(2, 3, 1.5, 2);
  cfg.belief_families = FamilyList(2, MarginalFamily::uniform(0.5, 3));
  const Trace t = run_repeated_game(g, cfg);
  std::vector<Vector> u(2, Vector::Zero(3));
  for (long r = 1; r <= 2; ++r) {
    std::vector<Vector> s;
    for (int j = 0; j < 2; ++j) s.push_back(quantal_response(cfg.belief_families[j], u[j]).probabilities);
    const StrategyProfile P(s);
    for (int j = 0; j < 2; ++j) {
      u[j] = step_update(u[j], payoff_vector(g, j, P), P[j], cfg.schedule(r), cfg.risk_families[j]);
    }
    const auto& rec = t.rounds[static_cast<std::size_t>(r - 1)];
    EXPECT_LE(rec.profile.distance_inf(P), 1e-12);
    for (int j = 0; j < 2; ++j) {
      EXPECT_LE(max_abs_diff(rec.estimates[j], u[j]), 1e-12);
      EXPECT_LE(max_abs_diff(rec.payoffs[j], payoff_vector(g, j, P)), 1e-15);
    }
  }
}

TEST(RunRepeatedGame, MatchingPenniesConvergesToUniform) {
  const auto cfg = base_config(2, 2, 3.0, 10000);
  const Trace t = run_repeated_game(testing::matching_pennies(), cfg);
  EXPECT_LE(t.final_profile.distance_inf(StrategyProfile::uniform(2, 2)), 1e-3);
  EXPECT_LT(t.final_residual, 1e-3);
  EXPECT_EQ(t.clamp_triggers, 0);
}

TEST(RunRepeatedGame, RandomGameResidualShrinks) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const Game g = testing::random_game(seed, 2, 3);
    auto cfg = base_config(2, 3, 6.0, 10000);
    const double full = run_repeated_game(g, cfg).final_residual;
    cfg.horizon = 1000;
    const double early = run_repeated_game(g, cfg).final_residual;
    EXPECT_LT(full, 1e-3);
    EXPECT_LE(full, early);
  }
}

TEST(RunRepeatedGame, DeterministicAndDownsampled) {
  const Game g = testing::random_game(6, 2, 3);
  auto cfg = base_config(2, 3, 2.0, 1000);
  cfg.downsample = 7;
  cfg.random_initial_estimates = true;
  cfg.seed = 99;
  const Trace a = run_repeated_game(g, cfg);
  const Trace b = run_repeated_game(g, cfg);
  EXPECT_EQ(trace_csv(a), trace_csv(b));
  ASSERT_EQ(a.rounds.size(), 1000u / 7 + 1);
  EXPECT_EQ(a.rounds.front().round, 7);
  EXPECT_EQ(a.rounds.back().round, 1000);
  cfg.seed = 100;
  EXPECT_NE(trace_csv(run_repeated_game(g, cfg)), trace_csv(a));
}

TEST(RunRepeatedGame, EveryRecordedProfileIsValid) {
  const Game g = testing::random_game(7, 3, 2);
  auto cfg = base_config(3, 2, 1.0, 500);
  cfg.belief_families = FamilyList(3, MarginalFamily::uniform(0.3, 2));
  const Trace t = run_repeated_game(g, cfg);
  EXPECT_EQ(t.rounds.size(), 500u);
  for (const auto& r : t.rounds) {
    for (int j = 0; j < 3; ++j) EXPECT_NO_THROW(validate_simplex(r.profile[j]));
  }
}

TEST(RunRepeatedGame, SparseBeliefsTriggerClamp) {
  // Action 0 is strictly dominant for both players, so uniform beliefs drive the
  // other action to an exact zero and exponential risk preferences need the clamp.
  const Game g = Game(2, 2, {{1, 1, 0, 0}, {1, 0, 1, 0}});
  auto cfg = base_config(2, 2, 1.0, 50);
  cfg.belief_families = FamilyList(2, MarginalFamily::uniform(0.05, 2));
  const Trace t = run_repeated_game(g, cfg);
  EXPECT_GT(t.clamp_triggers, 0);
  for (const auto& u : t.final_estimates) EXPECT_TRUE(u.allFinite());
}

TEST(RunRepeatedGame, StationaryTailImpliesSmallResidual) {
  const Game g = testing::random_game(8, 2, 2);
  auto cfg = base_config(2, 2, 3.0, 20000);
  cfg.schedule = StepSchedule::power(1.0, 0.6);
  const Trace t = run_repeated_game(g, cfg);
  if (t.tail_movement < 1e-10) EXPECT_LT(t.final_residual, 1e-6);
  // The limit agrees with the smooth game's fixed point.
  const auto fp = fixed_point_iterate(g, cfg.risk_families);
  EXPECT_LE(t.final_profile.distance_inf(fp.profile), 1e-3);
}

TEST(RunRepeatedGame, ResidualTrendOnStableInstances) {
  int checked = 0;
  for (std::uint64_t seed = 10; seed < 30; ++seed) {
    const Game g = testing::random_game(seed, 2, 3);
    auto cfg = base_config(2, 3, 6.0, 2000);
    cfg.random_initial_estimates = true;
    cfg.seed = seed;
    if (!assumption1_check(g, cfg.risk_families, 1).pass) continue;
    const Trace t = run_repeated_game(g, cfg);
    double first = 0.0;
    double last = 0.0;
    for (const auto& r : t.rounds) {
      const double res = seob_residual(g, r.profile, cfg.risk_families);
      if (r.round <= 200) first += res;
      if (r.round > 1800) last += res;
    }
    EXPECT_LT(last, first) << "seed " << seed;
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

}  // namespace
}  // namespace seob
