#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "poisonbench/random.hpp"

using poisonbench::RandomStream;

TEST(RandomStream, SameKeySameSequence) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, DifferentKeysDiffer) {
  RandomStream a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
  EXPECT_EQ(equal, 0);
}

TEST(RandomStream, NamedSplitsAreIndependentOfParentUse) {
  RandomStream parent(7);
  const auto before = parent.split("environment").next_u64();
  parent.next_u64();
  parent.next_u64();
  EXPECT_EQ(parent.split("environment").next_u64(), before);
  EXPECT_NE(RandomStream(7).split("agent").next_u64(), before);
}

TEST(RandomStream, IndexSplitsDiffer) {
  RandomStream root(3);
  EXPECT_NE(root.split(std::uint64_t{0}).next_u64(), root.split(std::uint64_t{1}).next_u64());
}

TEST(RandomStream, UniformRanges) {
  RandomStream r(11);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double o = r.uniform_open();
    ASSERT_GT(o, 0.0);
    ASSERT_LT(o, 1.0);
  }
}

TEST(RandomStream, UniformIntCoversRangeEvenly) {
  RandomStream r(5);
  std::array<int, 7> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.uniform_int(7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 4 * std::sqrt(n / 7.0));
}

TEST(RandomStream, UniformIntRejectsEmptyRange) {
  RandomStream r(5);
  EXPECT_THROW(r.uniform_int(0), std::invalid_argument);
  EXPECT_EQ(r.uniform_int(1), 0u);
}

TEST(RandomStream, BernoulliFrequency) {
  RandomStream r(9);
  const int n = 100000;
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += r.bernoulli(0.3);
  EXPECT_NEAR(hits / double(n), 0.3, 3 * std::sqrt(0.3 * 0.7 / n));
  EXPECT_FALSE(r.bernoulli(0.0));
  EXPECT_TRUE(r.bernoulli(1.0));
}

TEST(RandomStream, ExponentialMean) {
  RandomStream r(13);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += r.exponential();
  EXPECT_NEAR(sum / n, 1.0, 4.0 / std::sqrt(n));
}

TEST(RandomStream, CategoricalFollowsWeightsAndSkipsZeros) {
  RandomStream r(17);
  const std::vector<double> probs{0.0, 0.25, 0.0, 0.75};
  std::array<int, 4> counts{};
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(r.categorical(probs))];
  EXPECT_EQ(counts[0], 0);
  EXPECT_EQ(counts[2], 0);
  EXPECT_NEAR(counts[1] / double(n), 0.25, 4 * std::sqrt(0.25 * 0.75 / n));
}

TEST(RandomStream, CounterAdvancesPerDraw) {
  RandomStream r(1);
  EXPECT_EQ(r.counter(), 0u);
  r.uniform();
  r.next_u64();
  EXPECT_EQ(r.counter(), 2u);
}
