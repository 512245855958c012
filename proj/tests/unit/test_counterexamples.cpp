#include <gtest/gtest.h>

#include <cmath>

#include "kanto/counterexamples.hpp"
#include "oracles/frozen.hpp"

using namespace kanto;

TEST(LipCostGap, ThreeSitesAtTwo) {
  const auto g = lip_cost_gap(1, Exponent(2));
  EXPECT_EQ(g.volume, 3u);
  EXPECT_NEAR(g.extreme_gap, std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(g.osc_norm, 1.0, 1e-14);
  EXPECT_TRUE(g.enumerated);
}

TEST(LipCostGap, InfinityAndSingleSite) {
  for (int n : {0, 1, 2, 3}) EXPECT_NEAR(lip_cost_gap(n, Exponent::infinity()).extreme_gap, 2 * n + 1, 1e-12);
  for (const auto& p : {Exponent(3, 2), Exponent(2), Exponent(5), Exponent::infinity()})
    EXPECT_NEAR(lip_cost_gap(0, p).extreme_gap, 1.0, 1e-15);
  EXPECT_THROW(lip_cost_gap(2, Exponent(1)), std::domain_error);
}

TEST(LipCostGap, GrowsAsVolumePower) {
  for (const auto& p : {Exponent(3, 2), Exponent(2), Exponent(5), Exponent::infinity()}) {
    double prev = 0.0;
    for (int n = 0; n <= 6; ++n) {
      const auto g = lip_cost_gap(n, p);
      EXPECT_NEAR(g.extreme_gap, volume_power(g.volume, p.conjugate()), 1e-12);
      EXPECT_NEAR(g.osc_norm, 1.0, 1e-12);
      EXPECT_GT(g.extreme_gap, prev);
      prev = g.extreme_gap;
    }
  }
}

TEST(LipCostGap, ThreeLetterAlphabet) {
  const auto g = lip_cost_gap(1, Exponent(2), 3);
  EXPECT_NEAR(g.extreme_gap, std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(g.osc_norm, 1.0, 1e-14);
  EXPECT_TRUE(g.enumerated);
}

TEST(Dattes, LipschitzAgainstOracle) {
  for (const auto& row : frozen::kDattes) {
    if (row.lip2 == 0.0) continue;
    EXPECT_NEAR(dattes_lip2(row.L), row.lip2, 1e-12) << row.L;
  }
  for (long long L = 1; L <= 4; ++L) EXPECT_NEAR(dattes_lip2(L), dattes_lip2_exhaustive(L), 1e-14) << L;
}

TEST(Dattes, LipschitzBoundedByFour) {
  for (long long L : {1LL, 5LL, 17LL, 100LL, 999LL, 10000LL}) EXPECT_LE(dattes_lip2(L), 4.0) << L;
}

TEST(Dattes, LogMomentAgainstOracle) {
  for (const auto& row : frozen::kDattes) EXPECT_NEAR(dattes_mgf(row.L).log_moment, row.log_moment, 1e-10) << row.L;
  EXPECT_NEAR(dattes_mgf(1).mean, frozen::kDattesMeanL1, 1e-14);
}

TEST(Dattes, GrowthPastQuarterPower) {
  const long long Ls[] = {100, 1000, 10000};
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(dattes_mgf(Ls[i]).ratio_to_L_quarter, frozen::kDattesRatio[i], 1e-10);
  double prev = 0.0;
  for (long long L : {1LL, 2LL, 5LL, 10LL, 50LL, 100LL, 1000LL, 10000LL}) {
    const double v = dattes_mgf(L).log_moment;
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Dattes, CapRefusesHugeL) {
  EXPECT_THROW(dattes_mgf(kDattesCap + 1), std::domain_error);
  EXPECT_THROW(dattes_mgf(200, 100), std::domain_error);
}

TEST(Dattes, McDiarmidStillHolds) {
  for (long long L : {1LL, 10LL, 1000LL}) {
    const auto r = mcdiarmid_contrast(L);
    EXPECT_TRUE(r.mcdiarmid_holds) << L;
    EXPECT_LE(r.log_moment, r.mcdiarmid_rhs + 1e-12);
    EXPECT_NEAR(r.implied_K, 2 * r.log_moment / (r.lip2 * r.lip2), 1e-12);
  }
  // the Lipschitz-only constant must blow up: log moment exceeds (K/2) 16 for K = 0.05 at L = 10^4
  EXPECT_GT(mcdiarmid_contrast(10000).log_moment, 0.05 / 2 * 16);
  EXPECT_GT(mcdiarmid_contrast(10000).implied_K, mcdiarmid_contrast(100).implied_K);
}
