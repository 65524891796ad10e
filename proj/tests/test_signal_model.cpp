#include <gtest/gtest.h>

#include <set>

#include "modcs/errors.hpp"
#include "modcs/signal_model.hpp"

using namespace modcs;

namespace {

ModelParams Params(int m, int s0, int sa, int d, double r, std::uint64_t seed = 3) {
  ModelParams p;
  p.m = m;
  p.s0 = s0;
  p.sa = sa;
  p.d = d;
  p.r = r;
  p.seed = seed;
  return p;
}

// State at t-1 of the worked transition: Sa = 1, d = 4, S0 = 12.
SignalModelState WorkedExampleState(const ModelParams& p) {
  SignalModelState s;
  s.t = 5;
  s.level.assign(p.m, 0);
  s.sign.assign(p.m, 0);
  s.increasing.assign(p.d + 1, {});
  s.decreasing.assign(p.d, {});
  auto put = [&](int i, int level) {
    s.level[i] = level;
    s.sign[i] = 1;
  };
  // rising: 12 at 1, 74 at 2, 40 at 3, 50 just stable
  put(12, 1);
  put(74, 2);
  put(40, 3);
  put(50, 4);
  s.increasing[1] = {12};
  s.increasing[2] = {74};
  s.increasing[3] = {40};
  s.increasing[4] = {50};
  // falling: 66 at 3, 2 at 2, 91 at 1
  put(66, 3);
  put(2, 2);
  put(91, 1);
  s.decreasing[3] = {66};
  s.decreasing[2] = {2};
  s.decreasing[1] = {91};
  s.decreasing[0] = {7};
  for (int i : {20, 21, 22, 23, 24}) put(i, 4);
  return s;
}

}  // namespace

TEST(SignalModel, InitialLevelsHoldTwoSaPerIntermediateLevel) {
  const ModelParams p = Params(100, 12, 1, 4, 0.7);
  const SignalModelState s = InitState(p);
  for (int j = 1; j < 4; ++j) EXPECT_EQ(s.AtLevel(j).size(), 2u) << "level " << j;
  EXPECT_EQ(s.AtLevel(4).size(), 6u);
  EXPECT_NO_THROW(CheckStateInvariants(s, p));
}

TEST(SignalModel, SingleLevelIsAllStable) {
  const ModelParams p = Params(10, 2, 1, 1, 1.0);
  const SignalModelState s = InitState(p);
  EXPECT_EQ(s.AtLevel(1).size(), 2u);
  for (int i : s.support()) EXPECT_DOUBLE_EQ(std::abs(s.Values(p.r)[i]), 1.0);
}

TEST(SignalModel, InitialPowerMatchesClosedForm) {
  const ModelParams p = Params(100, 12, 1, 4, 1.0);
  EXPECT_DOUBLE_EQ(ModelPower(p), 124.0);
  EXPECT_DOUBLE_EQ(InitState(p).Power(p.r), 124.0);
}

TEST(SignalModel, WorkedTransitionSmallSet) {
  const ModelParams p = Params(100, 12, 1, 4, 1.0);
  const SignalModelState prev = WorkedExampleState(p);
  ASSERT_NO_THROW(CheckStateInvariants(prev, p));
  EXPECT_EQ(GetCohortSets(prev, p, 3).small, (Support{2, 12, 74, 91}));

  StepChoices c;
  c.additions = {79};
  c.start_decreasing = {20};
  const SignalModelState next = StepWithChoices(prev, p, c);
  const CohortSets sets = GetCohortSets(next, p, 3);
  EXPECT_EQ(sets.added, (Support{79}));
  EXPECT_EQ(sets.removed, (Support{91}));
  EXPECT_EQ(sets.increasing, (Support{74}));
  EXPECT_EQ(sets.decreasing, (Support{66}));
  EXPECT_EQ(sets.small, (Support{2, 12, 66, 79}));
  EXPECT_EQ(sets.small.size(), static_cast<std::size_t>(2 * (3 - 1) * p.sa));
  EXPECT_NO_THROW(CheckStateInvariants(next, p));
}

TEST(SignalModel, InconsistentChoicesRejected) {
  const ModelParams p = Params(100, 12, 1, 4, 1.0);
  const SignalModelState prev = WorkedExampleState(p);
  StepChoices c;
  c.additions = {12};  // already in the support
  c.start_decreasing = {20};
  EXPECT_THROW(StepWithChoices(prev, p, c), ArgumentError);
  c.additions = {79};
  c.start_decreasing = {74};  // not stable
  EXPECT_THROW(StepWithChoices(prev, p, c), ArgumentError);
}

TEST(SignalModel, SingleLevelSupportUpdate) {
  const ModelParams p = Params(30, 4, 1, 1, 2.0, 11);
  SignalModelState s = InitState(p);
  for (int t = 0; t < 50; ++t) {
    const SignalModelState next = Step(s, p);
    const Support expected =
        Difference(Union(s.support(), next.increasing[1]), next.decreasing[0]);
    EXPECT_EQ(next.support(), expected);
    for (int i : next.support()) EXPECT_DOUBLE_EQ(std::abs(next.Values(p.r)[i]), 2.0);
    s = next;
  }
}

TEST(SignalModel, PowerConstantOverLongRun) {
  const ModelParams p = Params(200, 20, 2, 3, 1.0, 5);
  // (S0 - (2d - 2) Sa) M^2 + 2 Sa (1 + 4) with S0 = 20, Sa = 2, d = 3, M = 3.
  const double expected = (20 - 4 * 2) * 9.0 + 2 * 2 * 5.0;
  EXPECT_DOUBLE_EQ(ModelPower(p), expected);
  SignalModelState s = InitState(p);
  for (int t = 1; t <= 1000; ++t) {
    s = Step(s, p);
    ASSERT_DOUBLE_EQ(s.Power(p.r), expected) << "t=" << t;
    ASSERT_NO_THROW(CheckStateInvariants(s, p));
  }
}

TEST(SignalModel, SmallSetRecursionHoldsOnTrajectories) {
  for (Generator g : {Generator::kGen1, Generator::kGen2}) {
    ModelParams p = Params(80, 15, 2, 4, 0.5, 17);
    p.generator = g;
    SignalModelState s = InitState(p);
    for (int t = 1; t <= 200; ++t) {
      const SignalModelState next = Step(s, p);
      for (int j = 1; j <= p.d; ++j) {
        const CohortSets before = GetCohortSets(s, p, j);
        const CohortSets after = GetCohortSets(next, p, j);
        const Support lhs = Difference(Union(before.small, after.added), after.removed);
        const Support rhs =
            Difference(Union(after.small, after.increasing), after.decreasing);
        ASSERT_EQ(lhs, rhs) << "t=" << t << " j=" << j;
        ASSERT_EQ(after.small.size(), static_cast<std::size_t>(2 * (j - 1) * p.sa));
      }
      ASSERT_NO_THROW(CheckStateInvariants(next, p));
      s = next;
    }
  }
}

TEST(SignalModel, CohortLevelOneSmallSetEmpty) {
  const ModelParams p = Params(60, 10, 1, 3, 1.0);
  SignalModelState s = InitState(p);
  for (int t = 0; t < 20; ++t) {
    EXPECT_TRUE(GetCohortSets(s, p, 1).small.empty());
    s = Step(s, p);
  }
  EXPECT_THROW(GetCohortSets(s, p, 0), ArgumentError);
  EXPECT_THROW(GetCohortSets(s, p, 4), ArgumentError);
}

TEST(SignalModel, SameSeedSameTrajectory) {
  const ModelParams p = Params(200, 20, 2, 3, 1.0, 42);
  SignalModelState a = InitState(p), b = InitState(p);
  for (int t = 0; t < 30; ++t) {
    a = Step(a, p);
    b = Step(b, p);
  }
  EXPECT_EQ(a.level, b.level);
  EXPECT_EQ(a.sign, b.sign);
  ModelParams q = p;
  q.seed = 43;
  EXPECT_NE(InitState(q).support(), InitState(p).support());
}

TEST(SignalModel, InvalidParametersRejected) {
  EXPECT_THROW(Params(10, 20, 1, 1, 1.0).Validate(), ConfigurationError);
  EXPECT_THROW(Params(100, 4, 1, 3, 1.0).Validate(), ConfigurationError);
  EXPECT_THROW(Params(100, 12, 1, 4, -1.0).Validate(), ConfigurationError);
  EXPECT_THROW(Params(100, 12, 0, 4, 1.0).Validate(), ConfigurationError);
  EXPECT_NO_THROW(Params(100, 5, 1, 3, 1.0).Validate());
}

TEST(SignalModel, SignsOnlyOnSupport) {
  const ModelParams p = Params(100, 20, 2, 3, 1.0, 9);
  SignalModelState s = InitState(p);
  int negatives = 0;
  for (int t = 0; t < 100; ++t) {
    s = Step(s, p);
    for (int i = 0; i < p.m; ++i) {
      ASSERT_EQ(s.sign[i] == 0, s.level[i] == 0);
      negatives += s.sign[i] < 0;
    }
  }
  EXPECT_GT(negatives, 0);
}
