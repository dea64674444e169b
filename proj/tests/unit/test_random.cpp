#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "tsc/random.hpp"

namespace tsc {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, UniformStaysInUnitInterval) {
  Rng r(3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, IndexCoversRangeUniformly) {
  Rng r(5);
  std::array<int, 7> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) ++counts[r.index(7)];
  for (int c : counts) EXPECT_NEAR(c, n / 7.0, 0.05 * n / 7.0);
}

TEST(Rng, PoissonMeanAndVariance) {
  Rng r(11);
  const double mean = 3.5;
  const int n = 200000;
  double s = 0.0;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const int k = r.poisson(mean);
    s += k;
    ss += static_cast<double>(k) * k;
  }
  const double m = s / n;
  EXPECT_NEAR(m, mean, 0.02);
  EXPECT_NEAR(ss / n - m * m, mean, 0.05);
}

TEST(Rng, PoissonConsumesOneDrawPerCall) {
  Rng a(9);
  Rng b(9);
  a.poisson(0.2);
  a.poisson(50.0);
  b.uniform();
  b.uniform();
  EXPECT_EQ(a.next(), b.next());
}

TEST(Rng, PoissonZeroMeanIsZero) {
  Rng r(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(r.poisson(0.0), 0);
}

TEST(Rng, NormalMoments) {
  Rng r(17);
  const int n = 100000;
  double s = 0.0;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    ss += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.02);
  EXPECT_NEAR(ss / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng r(4);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  r.shuffle(v);
  std::set<int> seen(v.begin(), v.end());
  EXPECT_EQ(seen.size(), 50u);
}

TEST(DeriveSeed, StreamsDiffer) {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 100; ++s) seeds.insert(derive_seed(7, s));
  EXPECT_EQ(seeds.size(), 100u);
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
  EXPECT_NE(derive_seed(7, 3), derive_seed(8, 3));
}

}  // namespace
}  // namespace tsc
