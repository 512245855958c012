#include <gtest/gtest.h>

#include <cmath>

#include "kanto/lattice.hpp"
#include "kanto/random.hpp"
#include "oracles/frozen.hpp"

using namespace kanto;

namespace {

LocalFunction random_function(const ConfigSpace& sp, Rng& rng) {
  std::vector<double> v(sp.size());
  for (double& x : v) x = rng.normal();
  return LocalFunction(sp, std::move(v));
}

}  // namespace

TEST(Rank, ZeroWordAndMaxWord) {
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const std::vector<int> zero{0, 0}, top{1, 1};
  EXPECT_EQ(sp.rank(zero), 0u);
  EXPECT_EQ(sp.rank(top), 3u);
}

TEST(Rank, SingleSiteIdentity) {
  const ConfigSpace sp(Volume::interval(0, 0), 3);
  const std::vector<int> c{2};
  EXPECT_EQ(sp.rank(c), 2u);
}

TEST(Rank, LittleEndianSiteZeroFastest) {
  const ConfigSpace sp(Volume::interval(0, 1), 3);
  const std::vector<int> c{1, 0}, d{0, 1};
  EXPECT_EQ(sp.rank(c), 1u);
  EXPECT_EQ(sp.rank(d), 3u);
}

TEST(Rank, SymbolOutOfRangeRejected) {
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const std::vector<int> bad{0, 2};
  EXPECT_THROW(sp.rank(bad), std::domain_error);
}

TEST(Rank, RoundTripAllIndices) {
  for (int k : {2, 3, 4})
    for (int n = 1; n <= 6; ++n) {
      if (std::pow(k, n) > 4096) continue;
      const ConfigSpace sp(Volume::interval(0, n - 1), k);
      for (std::size_t x = 0; x < sp.size(); ++x) {
        const auto c = sp.unrank(x);
        ASSERT_EQ(sp.rank(c), x);
        for (std::size_t s = 0; s < sp.sites(); ++s) ASSERT_EQ(sp.symbol(x, s), c[s]);
      }
    }
}

TEST(ConfigSpace, CapacityCap) {
  EXPECT_THROW(ConfigSpace(Volume::interval(0, 20), 2), CapacityError);
  EXPECT_NO_THROW(ConfigSpace(Volume::interval(0, 19), 2));
}

TEST(Volume, CubeIsLexicographicAndDuplicateFree) {
  const auto v = Volume::cube(2, 1);
  ASSERT_EQ(v.size(), 9u);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_TRUE(v[i - 1] < v[i]);
  const Volume dup({Site{1}, Site{0}, Site{1}});
  EXPECT_EQ(dup.size(), 2u);
  EXPECT_EQ(dup[0], Site{0});
}

TEST(Volume, MixedDimensionsRejected) {
  EXPECT_THROW(Volume({Site{0}, Site{0, 1}}), std::domain_error);
}

TEST(Oscillation, IndicatorHasUnitOscillation) {
  const ConfigSpace sp(Volume::interval(0, 0), 2);
  const auto f = LocalFunction::from(sp, [](std::span<const int> c) { return static_cast<double>(c[0]); });
  EXPECT_DOUBLE_EQ(oscillation(f, Site{0}), 1.0);
}

TEST(Oscillation, AdditiveSeparation) {
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const auto f = LocalFunction::from(sp, [](std::span<const int> c) { return static_cast<double>(c[0] + c[1]); });
  EXPECT_DOUBLE_EQ(oscillation(f, Site{0}), 1.0);
  EXPECT_DOUBLE_EQ(oscillation(f, Site{1}), 1.0);
  EXPECT_NEAR(osc_norm(f, Exponent(2)), std::sqrt(2.0), 1e-15);
}

TEST(Oscillation, WeightedSpinFamily) {
  const ConfigSpace sp(Volume::interval(-1, 1), 2);
  const auto f = LocalFunction::from(sp, [](std::span<const int> c) {
    double s = 0.0;
    for (int i = -1; i <= 1; ++i) s += spin(c[static_cast<std::size_t>(i + 1)], 2) / (1.0 + std::abs(i));
    return s;
  });
  EXPECT_NEAR(oscillation(f, Site{-1}), 1.0, 1e-15);
  EXPECT_NEAR(oscillation(f, Site{0}), 2.0, 1e-15);
  EXPECT_NEAR(oscillation(f, Site{1}), 1.0, 1e-15);
  EXPECT_NEAR(osc_norm(f, Exponent(2)), frozen::kSqrt6, 1e-14);
}

TEST(Oscillation, SiteOutsideVolumeRejected) {
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const auto f = LocalFunction::constant(sp, 1.0);
  EXPECT_THROW(oscillation(f, Site{5}), std::domain_error);
}

TEST(OscNorm, ConstantIsZeroForEveryExponent) {
  const ConfigSpace sp(Volume::interval(0, 2), 3);
  const auto f = LocalFunction::constant(sp, 4.2);
  for (const auto& q : {Exponent(1), Exponent(3, 2), Exponent(2), Exponent::infinity()}) EXPECT_EQ(osc_norm(f, q), 0.0);
  EXPECT_TRUE(dependence_set(f).empty());
}

TEST(OscNorm, SingleSiteAnyExponent) {
  const ConfigSpace sp(Volume::interval(0, 0), 2);
  const auto f = LocalFunction::from(sp, [](std::span<const int> c) { return static_cast<double>(c[0]); });
  for (const auto& q : {Exponent(1), Exponent(3, 2), Exponent(2), Exponent(7), Exponent::infinity()})
    EXPECT_DOUBLE_EQ(osc_norm(f, q), 1.0);
}

TEST(OscNorm, ExponentBelowOneRejected) {
  EXPECT_THROW(Exponent(1, 2).require_at_least_one(), std::domain_error);
  const ConfigSpace sp(Volume::interval(0, 0), 2);
  EXPECT_THROW(osc_norm(LocalFunction::constant(sp, 0.0), Exponent(1, 2)), std::domain_error);
}

TEST(OscNorm, NonincreasingInQ) {
  Rng rng(3);
  const ConfigSpace sp(Volume::interval(0, 2), 3);
  for (int t = 0; t < 50; ++t) {
    const auto f = random_function(sp, rng);
    double prev = osc_norm(f, Exponent(1));
    for (const auto& q : {Exponent(3, 2), Exponent(2), Exponent(5), Exponent::infinity()}) {
      const double cur = osc_norm(f, q);
      EXPECT_LE(cur, prev + 1e-12);
      prev = cur;
    }
  }
}

TEST(Oscillation, BasicEstimateExhaustive) {
  Rng rng(11);
  for (int k : {2, 3})
    for (int n = 1; n <= 3; ++n) {
      const ConfigSpace sp(Volume::interval(0, n - 1), k);
      for (int t = 0; t < 5; ++t) {
        const auto f = random_function(sp, rng);
        const auto d = oscillations(f);
        for (std::size_t x = 0; x < sp.size(); ++x)
          for (std::size_t y = 0; y < sp.size(); ++y) {
            double bound = 0.0;
            for (std::size_t s = 0; s < sp.sites(); ++s)
              if (sp.symbol(x, s) != sp.symbol(y, s)) bound += d[s];
            ASSERT_LE(std::abs(f[x] - f[y]), bound + 1e-12);
          }
        EXPECT_LE(f.max() - f.min(), osc_norm(f, Exponent(1)) + 1e-12);
      }
    }
}

TEST(Dependence, MatchesPositiveOscillations) {
  const ConfigSpace sp(Volume::interval(0, 2), 2);
  const auto f = LocalFunction::from(sp, [](std::span<const int> c) { return 2.0 * c[0] - c[2]; });
  const auto dep = dependence_set(f);
  ASSERT_EQ(dep.size(), 2u);
  EXPECT_EQ(dep[0], Site{0});
  EXPECT_EQ(dep[1], Site{2});
}

TEST(Embed, ShiftPreservesOscillations) {
  const ConfigSpace small(Volume::interval(0, 0), 2);
  const auto f = LocalFunction::from(small, [](std::span<const int> c) { return 3.0 * c[0]; });
  const ConfigSpace big(Volume::interval(-2, 2), 2);
  const auto g = embed(f, big, Site{1});
  EXPECT_DOUBLE_EQ(oscillation(g, Site{1}), 3.0);
  EXPECT_DOUBLE_EQ(oscillation(g, Site{0}), 0.0);
  EXPECT_THROW(embed(f, big, Site{5}), std::domain_error);
}

TEST(BlockSum, ZeroShiftIsIdentity) {
  const ConfigSpace sp(Volume::interval(0, 0), 2);
  const auto f = LocalFunction::from(sp, [](std::span<const int> c) { return spin(c[0], 2); });
  const auto T = block_sum(f, 0);
  ASSERT_EQ(T.size(), f.size());
  for (std::size_t x = 0; x < f.size(); ++x) EXPECT_DOUBLE_EQ(T[x], f[x]);
}

TEST(BlockSum, SpinSumOverThreeSites) {
  const ConfigSpace sp(Volume::interval(0, 0), 2);
  const auto f = LocalFunction::from(sp, [](std::span<const int> c) { return spin(c[0], 2); });
  const auto T = block_sum(f, 1);
  EXPECT_EQ(T.space().sites(), 3u);
  for (std::size_t x = 0; x < T.size(); ++x) {
    double s = 0.0;
    for (std::size_t p = 0; p < 3; ++p) s += spin(T.space().symbol(x, p), 2);
    EXPECT_DOUBLE_EQ(T[x], s);
  }
  EXPECT_DOUBLE_EQ(osc_norm(T, Exponent(1)), 6.0);
}

TEST(BlockSum, YoungBound) {
  Rng rng(5);
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  for (int t = 0; t < 10; ++t) {
    const auto f = random_function(sp, rng);
    const double d1 = osc_norm(f, Exponent(1));
    for (int n : {1, 2}) {
      const auto T = block_sum(f, n);
      const auto A = block_average(f, n);
      const std::size_t V = static_cast<std::size_t>(2 * n + 1);
      for (const auto& q : {Exponent(1), Exponent(2), Exponent::infinity()}) {
        EXPECT_LE(osc_norm(T, q), volume_power(V, q) * d1 + 1e-10);
        EXPECT_LE(osc_norm(A, q), d1 / volume_power(V, q.conjugate()) + 1e-10);
      }
    }
  }
}

TEST(Exponent, ParseAndConjugate) {
  EXPECT_EQ(Exponent::parse("3/2").conjugate(), Exponent(3));
  EXPECT_EQ(Exponent::parse("1").conjugate(), Exponent::infinity());
  EXPECT_EQ(Exponent::parse("inf").conjugate(), Exponent(1));
  EXPECT_EQ(Exponent::parse("1.5"), Exponent(3, 2));
  EXPECT_EQ(Exponent::parse("2").to_string(), "2");
  EXPECT_THROW(Exponent::parse("abc"), std::exception);
}
