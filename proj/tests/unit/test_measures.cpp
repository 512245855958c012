#include <gtest/gtest.h>

#include <cmath>

#include "kanto/measures.hpp"
#include "kanto/random.hpp"
#include "oracles/frozen.hpp"

using namespace kanto;

namespace {

Measure ber(double p) {
  return Measure(ConfigSpace(Volume::interval(0, 0), 2), {1.0 - p, p});
}

Measure random_measure(const ConfigSpace& sp, Rng& rng) { return Measure(sp, rng.flat_dirichlet(sp.size())); }

LocalFunction random_function(const ConfigSpace& sp, Rng& rng, double scale = 1.0) {
  std::vector<double> v(sp.size());
  for (double& x : v) x = scale * rng.normal();
  return LocalFunction(sp, std::move(v));
}

LocalFunction spin0(const ConfigSpace& sp, double a) {
  return LocalFunction::from(sp, [a](std::span<const int> c) { return a * spin(c[0], 2); });
}

}  // namespace

TEST(Measure, RejectsBadTables) {
  const ConfigSpace sp(Volume::interval(0, 0), 2);
  EXPECT_THROW(Measure(sp, {0.5, 0.6}), std::domain_error);
  EXPECT_THROW(Measure(sp, {1.2, -0.2}), std::domain_error);
  EXPECT_THROW(Measure(sp, {1.0}), std::domain_error);
}

TEST(Realize, FairProductIsUniform) {
  const auto m = realize(IidSpec{{0.5, 0.5}}, Volume::interval(0, 1));
  ASSERT_EQ(m.size(), 4u);
  for (std::size_t x = 0; x < 4; ++x) EXPECT_NEAR(m[x], 0.25, 1e-15);
}

TEST(Realize, FrozenChainChargesConstantWords) {
  const MarkovSpec spec{{{1.0, 0.0}, {0.0, 1.0}}, std::vector<double>{0.5, 0.5}};
  const auto m = realize(spec, Volume::interval(0, 1));
  EXPECT_NEAR(m[0], 0.5, 1e-15);
  EXPECT_NEAR(m[3], 0.5, 1e-15);
  EXPECT_EQ(m[1], 0.0);
  EXPECT_EQ(m[2], 0.0);
}

TEST(Realize, InfiniteTemperatureIsingIsUniform) {
  for (auto b : {Boundary::Free, Boundary::Plus, Boundary::Periodic}) {
    const auto m = realize(IsingSpec{0.0, 0.0, b}, Volume::interval(0, 2));
    for (std::size_t x = 0; x < m.size(); ++x) EXPECT_NEAR(m[x], 0.125, 1e-15);
  }
  const auto m2 = realize(IsingSpec{0.0, 0.0, Boundary::Free}, Volume::cube(2, 1));
  EXPECT_NEAR(m2[17], 1.0 / 512, 1e-15);
}

TEST(Realize, IsingFavoursAlignment) {
  const auto m = realize(IsingSpec{0.7, 0.0, Boundary::Free}, Volume::interval(0, 1));
  // aligned/anti-aligned weight ratio e^{2 beta}
  EXPECT_NEAR(m[0] / m[1], std::exp(1.4), 1e-12);
  EXPECT_NEAR(m[0], m[3], 1e-15);
}

TEST(Realize, ValidationErrors) {
  EXPECT_THROW(realize(MarkovSpec{{{0.5, 0.4}, {0.5, 0.5}}, std::nullopt}, Volume::interval(0, 1)), std::domain_error);
  EXPECT_THROW(realize(MarkovSpec{{{0.5, 0.5}, {0.5, 0.5}}, std::nullopt}, Volume::cube(2, 0)), std::domain_error);
  EXPECT_THROW(realize(IsingSpec{std::nan(""), 0.0, Boundary::Free}, Volume::interval(0, 1)), std::domain_error);
  EXPECT_THROW(realize(IidSpec{{0.3, 0.3}}, Volume::interval(0, 1)), std::domain_error);
}

TEST(Realize, MarkovStationaryMarginals) {
  const MarkovSpec spec{{{0.9, 0.1}, {0.3, 0.7}}, std::nullopt};
  const auto pi = stationary(spec);
  EXPECT_NEAR(pi[0], 0.75, 1e-12);
  const auto m = realize(spec, Volume::interval(0, 3));
  for (int s = 0; s < 4; ++s) {
    const auto one = marginal(m, Volume::interval(s, s));
    EXPECT_NEAR(one[0], 0.75, 1e-12);
  }
}

TEST(Marginal, IdentityOnFullVolume) {
  Rng rng(1);
  const ConfigSpace sp(Volume::interval(0, 2), 3);
  const auto m = random_measure(sp, rng);
  const auto same = marginal(m, sp.volume());
  for (std::size_t x = 0; x < m.size(); ++x) EXPECT_NEAR(same[x], m[x], 1e-15);
}

TEST(Marginal, ProductProjection) {
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const auto m = product(sp, {{0.7, 0.3}, {0.1, 0.9}});
  const auto a = marginal(m, Volume::interval(0, 0));
  const auto b = marginal(m, Volume::interval(1, 1));
  EXPECT_NEAR(a[1], 0.3, 1e-15);
  EXPECT_NEAR(b[1], 0.9, 1e-15);
  const auto u = marginal(Measure::uniform(sp), Volume::interval(1, 1));
  EXPECT_NEAR(u[0], 0.5, 1e-15);
  EXPECT_THROW(marginal(m, Volume::interval(3, 3)), std::domain_error);
}

TEST(RelativeEntropy, Examples) {
  const auto a = ber(0.5), b = ber(0.25);
  EXPECT_EQ(relative_entropy(a, a).value, 0.0);
  EXPECT_NEAR(relative_entropy(a, b).value, frozen::kKlHalfQuarter, 1e-15);
  const auto inf = relative_entropy(ber(1.0), ber(0.0));
  EXPECT_TRUE(inf.infinite);
  EXPECT_THROW(relative_entropy(a, realize(IidSpec{{0.5, 0.5}}, Volume::interval(0, 1))), std::domain_error);
}

TEST(RelativeEntropy, AdditiveOverProducts) {
  const auto nu = realize(IidSpec{{0.5, 0.5}}, Volume::interval(0, 2));
  const auto mu = realize(IidSpec{{0.75, 0.25}}, Volume::interval(0, 2));
  EXPECT_NEAR(relative_entropy(nu, mu).value, 3 * frozen::kKlHalfQuarter, 1e-14);
}

TEST(RelativeEntropy, NonnegativeOnRandomPairs) {
  Rng rng(2);
  const ConfigSpace sp(Volume::interval(0, 1), 3);
  for (int t = 0; t < 100; ++t) EXPECT_GE(relative_entropy(random_measure(sp, rng), random_measure(sp, rng)).value, 0.0);
}

TEST(LogMgf, Examples) {
  const ConfigSpace one(Volume::interval(0, 0), 2);
  const auto fair = Measure::uniform(one);
  EXPECT_EQ(log_mgf(fair, LocalFunction::constant(one, 3.0)), 0.0);
  EXPECT_NEAR(log_mgf(fair, spin0(one, 1.0)), frozen::kLogCosh1, 1e-15);
  for (double a : {1e-4, 0.3, 2.0, 40.0}) EXPECT_NEAR(log_mgf(fair, spin0(one, a)), std::log(std::cosh(a)), 1e-12 * (1 + a));
  const ConfigSpace two(Volume::interval(0, 1), 2);
  const auto f = LocalFunction::from(two, [](std::span<const int> c) { return spin(c[0], 2) + spin(c[1], 2); });
  EXPECT_NEAR(log_mgf(Measure::uniform(two), f), 2 * frozen::kLogCosh1, 1e-14);
}

TEST(LogMgf, NoOverflowForLargeFunctions) {
  const ConfigSpace one(Volume::interval(0, 0), 2);
  const double v = log_mgf(Measure::uniform(one), spin0(one, 800.0));
  EXPECT_NEAR(v, 800.0 - std::log(2.0), 1e-9);
}

TEST(LogMgf, TinyFunctionsKeepRelativeAccuracy) {
  const ConfigSpace one(Volume::interval(0, 0), 2);
  const double a = 1e-7;
  EXPECT_NEAR(log_mgf(Measure::uniform(one), spin0(one, a)) / (a * a / 2), 1.0, 1e-8);
}

TEST(Variational, GapVanishesAtDensity) {
  Rng rng(7);
  for (int k : {2, 3}) {
    const ConfigSpace sp(Volume::interval(0, 1), k);
    for (int t = 0; t < 50; ++t) {
      const auto mu = random_measure(sp, rng), nu = random_measure(sp, rng);
      const auto f = LocalFunction::from(sp, [&](std::span<const int> c) {
        const auto x = sp.rank(c);
        return std::log(nu[x] / mu[x]);
      });
      EXPECT_NEAR(entropy_variational_gap(nu, mu, f).value, 0.0, 1e-10);
    }
  }
}

TEST(Variational, ConstantFunctionGivesEntropy) {
  Rng rng(8);
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const auto mu = random_measure(sp, rng), nu = random_measure(sp, rng);
  EXPECT_NEAR(entropy_variational_gap(nu, mu, LocalFunction::constant(sp, 2.5)).value, relative_entropy(nu, mu).value,
              1e-14);
}

TEST(Variational, SelfPairGivesJensenGap) {
  Rng rng(9);
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const auto mu = random_measure(sp, rng);
  const auto f = random_function(sp, rng);
  const double g = entropy_variational_gap(mu, mu, f).value;
  EXPECT_NEAR(g, log_mgf(mu, f), 1e-14);
  EXPECT_GE(g, 0.0);
}

TEST(Variational, NonnegativeEverywhere) {
  Rng rng(10);
  const ConfigSpace sp(Volume::interval(0, 2), 2);
  for (int t = 0; t < 100; ++t) {
    const auto mu = random_measure(sp, rng), nu = random_measure(sp, rng);
    const auto f = random_function(sp, rng, 2.0);
    EXPECT_GE(entropy_variational_gap(nu, mu, f).value, -1e-12);
    EXPECT_GE(legendre_gap(mu, f, nu).value, -1e-12);
  }
}

TEST(Legendre, GapVanishesAtTilt) {
  Rng rng(12);
  for (int k : {2, 3}) {
    const ConfigSpace sp(Volume::interval(0, 1), k);
    for (int t = 0; t < 50; ++t) {
      const auto mu = random_measure(sp, rng);
      const auto f = random_function(sp, rng);
      EXPECT_NEAR(legendre_gap(mu, f, tilt(mu, f)).value, 0.0, 1e-10);
    }
  }
}

TEST(Legendre, ZeroFunctionGivesEntropyAndInfiniteFlag) {
  Rng rng(13);
  const ConfigSpace sp(Volume::interval(0, 1), 2);
  const auto mu = random_measure(sp, rng), nu = random_measure(sp, rng);
  EXPECT_NEAR(legendre_gap(mu, LocalFunction::constant(sp, 0.0), nu).value, relative_entropy(nu, mu).value, 1e-14);
  const auto dirac_mu = Measure::dirac(sp, 0);
  EXPECT_TRUE(legendre_gap(dirac_mu, LocalFunction::constant(sp, 0.0), nu).infinite);
  EXPECT_TRUE(entropy_variational_gap(nu, dirac_mu, LocalFunction::constant(sp, 0.0)).infinite);
}

TEST(Measure, JsonRoundTripOfVolume) {
  const auto v = Volume::cube(2, 1);
  EXPECT_EQ(volume_from_json(to_json(v)), v);
}
