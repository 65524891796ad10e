#include <gtest/gtest.h>

#include <set>

#include "modcs/random.hpp"
#include "modcs/support.hpp"

using namespace modcs;

TEST(CounterRng, StreamsAreReproducibleAndIndependent) {
  CounterRng a(7, 3, StreamTag::kNoise), b(7, 3, StreamTag::kNoise);
  CounterRng c(7, 4, StreamTag::kNoise), d(7, 3, StreamTag::kAdditions);
  bool differ_t = false, differ_tag = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differ_t |= x != c();
    differ_tag |= x != d();
  }
  EXPECT_TRUE(differ_t);
  EXPECT_TRUE(differ_tag);
}

TEST(CounterRng, UniformMomentsAndBelowRange) {
  CounterRng rng(123);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.Uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.Below(7), 7u);
}

TEST(CounterRng, NormalMoments) {
  CounterRng rng(99);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.StandardNormal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.015);
}

TEST(Sampling, WithoutReplacementSortedDistinct) {
  CounterRng rng(5);
  std::vector<int> pool;
  for (int i = 0; i < 50; i += 2) pool.push_back(i);
  for (int rep = 0; rep < 100; ++rep) {
    const auto s = SampleWithoutReplacement(pool, 10, rng);
    ASSERT_EQ(s.size(), 10u);
    ASSERT_TRUE(std::is_sorted(s.begin(), s.end()));
    ASSERT_EQ(std::set<int>(s.begin(), s.end()).size(), 10u);
    for (int i : s) ASSERT_EQ(i % 2, 0);
  }
}

TEST(Support, SetAlgebra) {
  const Support a{1, 3, 5, 7}, b{3, 4, 5};
  EXPECT_EQ(Union(a, b), (Support{1, 3, 4, 5, 7}));
  EXPECT_EQ(Difference(a, b), (Support{1, 7}));
  EXPECT_EQ(Intersection(a, b), (Support{3, 5}));
  EXPECT_EQ(Complement(b, 6), (Support{0, 1, 2}));
  EXPECT_TRUE(IsSubset(Support{3, 5}, a));
  EXPECT_FALSE(IsSubset(b, a));
  EXPECT_EQ(Normalize({5, 1, 5, 3}), (Support{1, 3, 5}));
}

TEST(Support, ThresholdIsStrict) {
  Eigen::VectorXd x(5);
  x << 0.0, -0.5, 0.2, 0.5, -1.0;
  EXPECT_EQ(AboveThreshold(x, 0.5), (Support{4}));
  EXPECT_EQ(NonzeroSupport(x), (Support{1, 2, 3, 4}));
}
