#include <gtest/gtest.h>

#include <cmath>

#include "kanto/gcb.hpp"
#include "oracles/frozen.hpp"

using namespace kanto;

namespace {

const IidSpec kFair{{0.5, 0.5}};

Measure fair(int sites) { return realize(kFair, Volume::interval(0, sites - 1)); }

LocalFunction spin_at(const ConfigSpace& sp, std::size_t pos, double a = 1.0) {
  return LocalFunction::from(sp, [=](std::span<const int> c) { return a * spin(c[pos], 2); });
}

double closed_form_ratio(double a) { return 2.0 * std::log(std::cosh(a / 2)) / (a * a); }

}  // namespace

TEST(GcbCheck, FairProductQuarterPasses) {
  const auto mu = fair(3);
  const auto rep = gcb_check(mu, 0.25, Exponent(2), standard_suite(mu.space(), 1, 30));
  EXPECT_TRUE(rep.passed());
  EXPECT_GT(rep.checked, 30u);
  EXPECT_LE(rep.max_ratio, 0.25 + 1e-12);
}

TEST(GcbCheck, ConstantNeverViolates) {
  const auto mu = fair(2);
  const auto rep = gcb_check(mu, 1e-6, Exponent(2), {{"c", LocalFunction::constant(mu.space(), 7.0)}});
  EXPECT_TRUE(rep.passed());
}

TEST(GcbCheck, EmptySuiteRejected) {
  EXPECT_THROW(gcb_check(fair(1), 0.25, Exponent(2), {}), std::domain_error);
}

TEST(GcbCheck, SingleCoinClosedForm) {
  const auto mu = fair(1);
  for (double a : {0.01, 0.5, 1.0, 3.0}) {
    const auto f = spin_at(mu.space(), 0, a / 2);  // gap a
    EXPECT_NEAR(log_mgf(mu, f), std::log(std::cosh(a / 2)), 1e-14);
    const auto rep = gcb_check(mu, 0.25, Exponent(2), {{"f", f}});
    EXPECT_NEAR(rep.max_ratio, closed_form_ratio(a), 1e-10);
  }
  EXPECT_NEAR(closed_form_ratio(1e-3), 0.25, 1e-7);
}

TEST(GcbCheck, SmallConstantFails) {
  const auto mu = fair(2);
  const auto rep = gcb_check(mu, 0.1, Exponent(2), standard_suite(mu.space(), 2, 8));
  EXPECT_FALSE(rep.passed());
  for (const auto& v : rep.violations) EXPECT_GT(v.lhs, v.rhs + kGcbTol);
}

TEST(GcbScaling, EllTwoImpliesScaledEllInfinity) {
  for (int n : {1, 2, 3, 4}) {
    const auto mu = fair(n);
    const auto suite = standard_suite(mu.space(), 3 + n, 12);
    ASSERT_TRUE(gcb_check(mu, 0.25, Exponent(2), suite).passed());
    EXPECT_TRUE(gcb_check(mu, 0.25 * n, Exponent::infinity(), suite).passed());
    // C * |Lambda|^{(2-p)/p} at q conjugate to p = 3/2
    const Exponent p(3, 2);
    EXPECT_TRUE(gcb_check(mu, 0.25 * std::pow(n, (2 - p.value()) / p.value()), p.conjugate(), suite).passed());
  }
}

TEST(GcbScaling, SubvolumeRestriction) {
  const auto big = fair(3);
  const auto small = fair(2);
  for (const auto& nf : standard_suite(small.space(), 9, 10)) {
    const auto lifted = embed(nf.f, big.space());
    EXPECT_NEAR(log_mgf(big, lifted), log_mgf(small, nf.f), 1e-13);
    EXPECT_NEAR(osc_norm(lifted, Exponent(2)), osc_norm(nf.f, Exponent(2)), 1e-13);
  }
}

TEST(OptimalConstant, FairCoin) {
  const auto oc = optimal_constant(fair(1), Exponent(2), 4, 1);
  EXPECT_GE(oc.C_lower, 0.2499 - 1e-3);
  EXPECT_LE(oc.C_lower, 0.25 + 1e-12);
  EXPECT_FALSE(oc.degenerate);
  EXPECT_NEAR(2 * log_mgf(fair(1), oc.witness) / (oc.scale * oc.scale), oc.C_lower, 1e-12);
}

TEST(OptimalConstant, DiracIsZero) {
  const ConfigSpace sp(Volume::interval(0, 0), 2);
  const auto oc = optimal_constant(Measure::dirac(sp, 1), Exponent(2), 3, 1);
  EXPECT_EQ(oc.C_lower, 0.0);
}

TEST(OptimalConstant, IsingAtInfiniteTemperature) {
  const auto mu = realize(IsingSpec{0.0, 0.0, Boundary::Free}, Volume::interval(0, 1));
  const auto oc = optimal_constant(mu, Exponent(2), 4, 2);
  EXPECT_GE(oc.C_lower, 0.25 - 1e-3);
  EXPECT_TRUE(gcb_check(mu, 0.25, Exponent(2), standard_suite(mu.space(), 5, 10)).passed());
  EXPECT_LE(oc.C_lower, 0.25 + 1e-9);
}

TEST(OptimalConstant, BiasedCoinBelowQuarter) {
  const auto mu = realize(IidSpec{{0.9, 0.1}}, Volume::interval(0, 0));
  const auto oc = optimal_constant(mu, Exponent(2), 4, 3);
  // passing constant must dominate any certified lower bound
  EXPECT_LE(oc.C_lower, 0.25 + 1e-12);
  EXPECT_GT(oc.C_lower, 0.0);
}

TEST(Edi, SelfPairIsZero) {
  const auto mu = fair(2);
  const auto rep = edi_check(mu, 0.25, Exponent(2), 30, 4);
  EXPECT_TRUE(rep.passed());
  for (const auto& t : rep.trials) EXPECT_GE(t.slack, -1e-8);
}

TEST(Edi, QuarterPassesAndTenthFails) {
  const auto mu = fair(2);
  EXPECT_TRUE(edi_check(mu, 0.25, Exponent(2), 100, 5).passed());
  EdiOptions tilted;
  tilted.tilt_directions.push_back(spin_at(mu.space(), 0).plus(spin_at(mu.space(), 1)));
  const auto bad = edi_check(mu, 0.1, Exponent(2), 100, 5, tilted);
  EXPECT_GT(bad.violations, 0u);
}

TEST(Edi, CouplingSideMirrors) {
  const auto mu = fair(2);
  EdiOptions side;
  side.use_coupling_side = true;
  EXPECT_TRUE(edi_check(mu, 0.25, Exponent(2), 60, 6, side).passed());
  EXPECT_GT(edi_check(mu, 0.1, Exponent(2), 60, 6, side).violations, 0u);
}

TEST(Edi, ViolationCsvHasHeader) {
  const auto rep = edi_check(fair(1), 0.1, Exponent(2), 20, 7);
  EXPECT_EQ(rep.violation_csv().rfind("trial,entropy,distance,bound,slack\n", 0), 0u);
}

TEST(Characterization, DirectionsAgree) {
  const std::vector<Volume> vols{Volume::interval(0, 0), Volume::interval(0, 1)};
  const auto good = characterization_check(kFair, 0.25, vols, 50, 8);
  EXPECT_TRUE(good.passed());
  const auto bad = characterization_check(kFair, 0.1, vols, 50, 8);
  EXPECT_GT(bad.violations, 0u);
  EXPECT_EQ(bad.cooccurring, bad.violations);
}

TEST(Etuve, ProductMeasures) {
  EXPECT_TRUE(etuve_check(fair(3), 60, 9).passed());
  const auto biased = realize(IidSpec{{0.8, 0.2}}, Volume::interval(0, 1));
  EXPECT_TRUE(etuve_check(biased, 60, 10).passed());
  const MarkovSpec chain{{{0.9, 0.1}, {0.1, 0.9}}, std::nullopt};
  EXPECT_THROW(etuve_check(realize(chain, Volume::interval(0, 1)), 5, 1), std::domain_error);
}

TEST(Pressure, Examples) {
  const ConfigSpace one(Volume::interval(0, 0), 2);
  EXPECT_NEAR(pressure(kFair, LocalFunction::constant(one, 0.0)).value, 0.0, 1e-14);
  EXPECT_NEAR(pressure(kFair, LocalFunction::constant(one, 1.7)).value, 1.7, 1e-12);
  const auto pv = pressure(kFair, spin_at(one, 0));
  EXPECT_NEAR(pv.value, frozen::kLogCosh1, 1e-12);
  EXPECT_LE(pv.lower, pv.value);
  EXPECT_GE(pv.upper, pv.value);
  EXPECT_LE(pv.upper - pv.lower, 1e-10);
  EXPECT_TRUE(pv.finite_n_consistent);
}

TEST(Pressure, NeighbourProductMatchesClosedForm) {
  const ConfigSpace two(Volume::interval(0, 1), 2);
  const auto f = LocalFunction::from(two, [](std::span<const int> c) { return spin(c[0], 2) * spin(c[1], 2); });
  EXPECT_NEAR(pressure(kFair, f).value, frozen::kLogCosh1, 1e-12);
}

TEST(Pressure, IidFiniteNIsConstantForSingleSiteFunctions) {
  const ConfigSpace one(Volume::interval(0, 0), 2);
  const auto f = LocalFunction::from(one, [](std::span<const int> c) { return 0.3 * c[0]; });
  const auto pv = pressure(IidSpec{{0.6, 0.4}}, f);
  ASSERT_FALSE(pv.finite_n.empty());
  for (const auto& r : pv.finite_n) EXPECT_NEAR(r.value, pv.value, 1e-12);
}

TEST(Pressure, MarkovAgainstBruteForce) {
  const MarkovSpec chain{{{0.8, 0.2}, {0.4, 0.6}}, std::nullopt};
  const ConfigSpace one(Volume::interval(0, 0), 2);
  const auto f = spin_at(one, 0, 0.7);
  const auto pv = pressure(chain, f);
  EXPECT_TRUE(pv.finite_n_consistent);
  // (1/n) log mu(exp(sum)) converges to log lambda at rate O(1/n)
  const auto& last = pv.finite_n.back();
  EXPECT_NEAR(last.value, pv.value, 1.0 / last.n);
  EXPECT_THROW(pressure(IsingSpec{0.1, 0.0, Boundary::Free}, f), std::domain_error);
}

TEST(ThermoGcb, FiniteRangeSuite) {
  const auto suite = finite_range_suite(2, 20, 11);
  ASSERT_EQ(suite.size(), 20u);
  const auto rep = thermo_gcb_check(kFair, 0.25, suite);
  EXPECT_TRUE(rep.passed());
  for (const auto& r : rep.rows) EXPECT_LE(r.pressure_centered, r.bound + 1e-9);
  EXPECT_NEAR(frozen::kLogCosh1, std::log(std::cosh(1.0)), 1e-15);
  EXPECT_LE(frozen::kLogCosh1, 0.5);
}
