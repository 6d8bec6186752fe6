#include <algorithm>
#include <vector>

#include "common.hpp"
#include "pileup/blayer.hpp"
#include "pileup/energetics.hpp"
#include "pileup/testing/oracles.hpp"

using namespace pileup;

namespace {

StrainField random_strain(int n, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  StrainField e{n, std::vector<double>(static_cast<std::size_t>(n))};
  double mean = 0.0;
  for (auto& v : e.eps) mean += (v = u(pileup_test::rng()));
  mean /= n;
  for (auto& v : e.eps) v -= mean;
  return e;
}

}  // namespace

TEST(Energetics, PhiExamples) {
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_EQ(phi(p, 1, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(phi(p, 1, 1.0), 1.25);
  EXPECT_REL(phi(p, 2, -0.5), 0.069444444444444444, 1e-14);
  EXPECT_THROW(phi(p, 1, -1.0), DomainError);
  EXPECT_THROW(phi(p, 0, 0.1), ParameterError);
}

TEST(Energetics, PhiSmallArgumentIsAccurate) {
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int k : {1, 3}) {
      for (double y : {9e-4, 1e-5, -3e-4, 2e-7}) {
        const long double kd = k, yd = y;
        const long double h = 1e-7L;
        const long double v1 = (pileup::testing::value_ld(p, kd + h) - pileup::testing::value_ld(p, kd - h)) / (2 * h);
        const long double ref = pileup::testing::value_ld(p, kd + yd) - pileup::testing::value_ld(p, kd) - v1 * yd;
        const double r = static_cast<double>(ref);
        EXPECT_NEAR(phi(p, k, y), r, 1e-5 * std::abs(r) + 1e-18) << k << ' ' << y;
      }
    }
  }
}

TEST(Energetics, PhiLowerBound) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& p : {PotentialSpec::power_law(1.2), PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int t = 0; t < 5000; ++t) {
      const int k = 1 + static_cast<int>(u(pileup_test::rng()) * 20);
      const double y = -k + 1.0 + u(pileup_test::rng()) * 10.0;
      if (y <= -1.0) continue;
      EXPECT_GE(phi(p, k, y), phi_lower_bound(p, k, y) - 1e-14) << k << ' ' << y;
    }
  }
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_DOUBLE_EQ(phi_lower_bound(p, 1, 1.0), 0.5 * lambda_modulus(p, 2.0));
}

TEST(Energetics, FiniteStressExamples) {
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_EQ(sigma_n(p, 4)(2), 0.0);
  EXPECT_REL(sigma_n(p, 6)(1), 0.47664814814814815, 1e-14);
  EXPECT_EQ(sigma_n(p, 6)(10), 0.0);
  EXPECT_THROW(sigma_n(p, 1), ParameterError);
  EXPECT_THROW(sigma_n(p, 6)(0), IndexError);
}

TEST(Energetics, LimitStressValues) {
  const auto a2 = sigma_inf(PotentialSpec::power_law(2.0), 3);
  EXPECT_REL(a2(1), 0.88575432737726430, 1e-12);
  EXPECT_REL(a2(2), 0.48164052105807573, 1e-12);
  EXPECT_REL(a2(3), 0.32752671473888716, 1e-12);
  EXPECT_REL(sigma_inf(PotentialSpec::power_law(3.0), 1)(1), 0.35920100834536828, 1e-12);
  const double wall[6] = {0.23248256763385036,   0.044091792612419538,    0.0077446772671309102,
                          0.0012905992352851744, 0.00020752618834607224, 3.2534188416478279e-5};
  const auto w = sigma_inf(PotentialSpec::wall(), 6);
  for (int i = 1; i <= 6; ++i) EXPECT_NEAR(w(i), wall[i - 1], 1e-13);
  for (int i = 5; i <= 6; ++i) EXPECT_LE(w(i), 1e-3);
}

TEST(Energetics, StressOrdering) {
  for (const auto& p : {PotentialSpec::power_law(1.2), PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    const auto inf = sigma_inf(p, 600);
    for (int i = 2; i <= 600; ++i) EXPECT_LE(inf(i), inf(i - 1));
    for (int n : {10, 101, 1000}) {
      const auto fin = sigma_n(p, n);
      for (int i = 1; i <= n / 2; ++i) {
        EXPECT_GE(fin(i), 0.0);
        EXPECT_LE(fin(i), inf(i) + 1e-12) << p.to_string() << " n=" << n << " i=" << i;
      }
    }
  }
}

TEST(Energetics, StressGapShrinks) {
  const auto p = PotentialSpec::power_law(2.0);
  double prev = INFINITY;
  for (int n : {16, 64, 256}) {
    const double g = stress_l2_gap(p, n);
    EXPECT_LT(g, prev);
    prev = g;
  }
}

TEST(Energetics, RenormalisedEnergyExamples) {
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_EQ(renorm_energy(p, StrainField{4, {0, 0, 0, 0}}), 0.0);
  EXPECT_REL(renorm_energy(p, StrainField{3, {-0.1, 0.0, 0.1}}), 0.064779862090123389, 1e-13);
  EXPECT_THROW(renorm_energy(p, StrainField{3, {-0.1, 0.0, 0.2}}), DomainError);
  EXPECT_THROW(renorm_energy(p, StrainField{3, {-1.5, 0.75, 0.75}}), DomainError);
  const auto z = renorm_energy_split(p, StrainField{4, {0, 0, 0, 0}});
  EXPECT_EQ(z.q_part, 0.0);
  EXPECT_EQ(z.linear_part, 0.0);
}

TEST(Energetics, SplittingIdentity) {
  for (const auto& p : {PotentialSpec::power_law(1.2), PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int n : {4, 8, 16, 32}) {
      for (int t = 0; t < 25; ++t) {
        const auto e = random_strain(n, 0.5);
        const double direct = renorm_energy(p, e);
        const auto sp = renorm_energy_split(p, e);
        EXPECT_NEAR(direct, sp.q_part + sp.linear_part, 1e-12 * (1.0 + std::abs(sp.q_part)));
        EXPECT_GE(sp.q_part, 0.0);
        double single = 0.0;
        for (double v : e.eps) single += phi(p, 1, v);
        EXPECT_GE(sp.q_part, single - 1e-13);
      }
    }
  }
}

TEST(Energetics, RenormalisedEnergyMatchesPositions) {
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int n : {4, 9, 16}) {
      const auto e = random_strain(n, 0.4);
      EXPECT_NEAR(renorm_energy(p, e), pileup::testing::renorm_energy_from_positions(p, e), 1e-10);
    }
  }
}

TEST(Energetics, ReversalSymmetry) {
  const auto p = PotentialSpec::power_law(2.0);
  const auto e = random_strain(12, 0.3);
  EXPECT_NEAR(renorm_energy(p, e), renorm_energy(p, e.reversed()), 1e-13);
}

TEST(Energetics, LimitEnergyConvergesInRange) {
  const auto p = PotentialSpec::power_law(2.0);
  const auto s = solve_bl(p, 1000, 1100).solution;
  const auto sig = sigma_inf(p, 1000);
  const double e4 = limit_energy_trunc(p, s.eps_l, 4000, sig);
  const double e8 = limit_energy_trunc(p, s.eps_l, 8000, sig);
  const double e16 = limit_energy_trunc(p, s.eps_l, 16000, sig);
  EXPECT_LT(std::abs(e16 - e8), std::abs(e8 - e4));
  EXPECT_LE(std::abs(e16 - e8), 1e-9);
  EXPECT_LT(e8, 0.0);
  for (int l : {1, 5, 50}) {
    for (double h : {1e-3, -1e-3}) {
      auto e = s.eps_l;
      e[l - 1] += h;
      EXPECT_GT(limit_energy_trunc(p, e, 4000, sig), e4) << l << ' ' << h;
    }
  }
  EXPECT_EQ(limit_energy_trunc(p, std::vector<double>(5, 0.0), 10, sig), 0.0);
  EXPECT_THROW(limit_energy_trunc(p, s.eps_l, 10, sig), ParameterError);
}

TEST(Energetics, CoercivityFloor) {
  EXPECT_THROW(coercivity_floor(PotentialSpec::power_law(1.2)), Divergence);
  const double f = coercivity_floor(PotentialSpec::power_law(2.0));
  EXPECT_LT(f, 0.0);
  EXPECT_GT(f, -10.0);
  EXPECT_LT(coercivity_floor(PotentialSpec::wall()), 0.0);
}

TEST(Energetics, IllPosednessDemo) {
  const std::vector<int> N{100, 200, 400};
  const auto low = illposedness_demo(PotentialSpec::power_law(1.2), 0.7, N);
  ASSERT_EQ(low.size(), 3u);
  EXPECT_LT(low[1], low[0]);
  EXPECT_LT(low[2], low[1]);
  const auto p2 = PotentialSpec::power_law(2.0);
  EXPECT_TRUE(within_band(p2, illposedness_demo(p2, 1.0, N)));
  const std::vector<int> one{1};
  const auto single = illposedness_demo(p2, 1.0, one);
  ASSERT_EQ(single.size(), 1u);
  EXPECT_TRUE(std::isfinite(single[0]));
  EXPECT_THROW(illposedness_demo(PotentialSpec::wall(), 1.0, N), ParameterError);
  EXPECT_THROW(illposedness_demo(p2, 0.5, N), ParameterError);
  EXPECT_THROW(illposedness_demo(PotentialSpec::power_law(1.2), 0.9, N), ParameterError);
  EXPECT_THROW(illposedness_demo(p2, 1.0, std::vector<int>{}), ParameterError);
  EXPECT_THROW(illposedness_demo(p2, 1.0, std::vector<int>{10, 5}), ParameterError);
}
