#include <algorithm>
#include <vector>

#include "common.hpp"
#include "pileup/equilibrium.hpp"
#include "pileup/testing/oracles.hpp"

using namespace pileup;

TEST(Equilibrium, ResidualExamples) {
  const auto p = PotentialSpec::power_law(2.0);
  const auto r = residual(p, Configuration{2, {0.0, 0.5, 1.0}});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 0.0, 1e-15);
  const auto s = residual(p, Configuration{2, {0.0, 0.4, 1.0}});
  EXPECT_REL(s[0], -2.748842592592592, 1e-14);
  const auto e = residual(p, Configuration::equispaced(4));
  EXPECT_NEAR(e[0], -e[2], 1e-14);
  EXPECT_NEAR(e[1], 0.0, 1e-14);
  EXPECT_TRUE(residual(p, Configuration::equispaced(1)).empty());
}

TEST(Equilibrium, InvalidConfigurations) {
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_THROW(residual(p, Configuration{2, {0.0, 0.0, 1.0}}), DomainError);
  EXPECT_THROW(residual(p, Configuration{3, {0.0, 0.6, 0.5, 1.0}}), DomainError);
  EXPECT_THROW(residual(p, Configuration{2, {0.0, 1.0}}), ParameterError);
  EXPECT_THROW(residual(p, Configuration{2, {0.1, 0.5, 1.0}}), ParameterError);
  EXPECT_THROW(Configuration::equispaced(0), ParameterError);
}

TEST(Equilibrium, EnergyExamples) {
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_DOUBLE_EQ(energy_total(p, Configuration::equispaced(1)), 1.0);
  EXPECT_DOUBLE_EQ(energy_total(p, Configuration::equispaced(2)), 1.125);
  EXPECT_REL(energy_total(p, Configuration::equispaced(4)), 1.2586805555555556, 1e-15);
  EXPECT_TRUE(std::isinf(energy_total(p, Configuration{2, {0.0, 0.0, 1.0}})));
}

TEST(Equilibrium, ResidualIsEnergyGradient) {
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 6;
      Configuration c = Configuration::equispaced(n);
      for (int i = 1; i < n; ++i) c.x[i] += jitter(pileup_test::rng()) / n;
      const auto r = residual(p, c);
      for (int i = 1; i < n; ++i) {
        const double h = 1e-6;
        Configuration up = c, dn = c;
        up.x[i] += h;
        dn.x[i] -= h;
        // d(n E_n)/dy with y = n x equals dE_n/dx
        const double fd = (energy_total(p, up) - energy_total(p, dn)) / (2.0 * h);
        EXPECT_NEAR(r[i - 1], fd, 1e-6 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}

TEST(Equilibrium, SolveSmallCases) {
  const auto p = PotentialSpec::power_law(2.0);
  const auto one = solve_finite(p, 1);
  EXPECT_EQ(one.configuration.x, (std::vector<double>{0.0, 1.0}));
  EXPECT_TRUE(one.report.converged);
  const auto two = solve_finite(p, 2);
  EXPECT_DOUBLE_EQ(two.configuration.x[1], 0.5);
}

TEST(Equilibrium, MatchesBruteForceOracle) {
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::power_law(1.3), PotentialSpec::wall()}) {
    for (int n = 2; n <= 5; ++n) {
      const auto x = solve_finite(p, n).configuration.x;
      const auto ref = pileup::testing::brute_force_minimize(p, n);
      for (int i = 0; i <= n; ++i) EXPECT_NEAR(x[i], ref[i], 1e-8) << p.to_string() << " n=" << n;
    }
  }
}

TEST(Equilibrium, SolutionProperties) {
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (int n : {7, 64, 129}) {
      const auto fs = solve_finite(p, n);
      const auto& x = fs.configuration.x;
      EXPECT_TRUE(fs.report.converged);
      EXPECT_LE(detail::sup_norm(residual(p, fs.configuration)), 1e-12 * n);
      for (int i = 0; i <= n; ++i) EXPECT_NEAR(x[i], 1.0 - x[n - i], 1e-14);
      const auto e = strain(fs.configuration);
      long double sum = 0.0L;
      for (double v : e.eps) sum += v;
      EXPECT_LE(std::abs(static_cast<double>(sum)), 1e-12 * n);
      const auto& hist = fs.report.energy_history;
      for (std::size_t k = 1; k < hist.size(); ++k) EXPECT_LE(hist[k], hist[k - 1] * (1.0 + 1e-14));
    }
  }
}

TEST(Equilibrium, StrainAndDensity) {
  const auto e = strain(Configuration{2, {0.0, 0.4, 1.0}});
  EXPECT_NEAR(e(1), -0.2, 1e-15);
  EXPECT_NEAR(e(2), 0.2, 1e-15);
  for (double v : strain(Configuration::equispaced(16)).eps) EXPECT_NEAR(v, 0.0, 1e-15);
  for (double r : discrete_density(Configuration::equispaced(16))) EXPECT_NEAR(r, 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(discrete_density(Configuration{2, {0.0, 0.4, 1.0}})[0], 1.0);
  EXPECT_THROW(discrete_density(Configuration::equispaced(1)), ParameterError);
}

// Compression peaks at the ends and flattens to 1 in the bulk.
TEST(Equilibrium, DensityProfileAtSixtyFour) {
  const int n = 64;
  const auto fs = solve_finite(PotentialSpec::power_law(2.0), n);
  const auto rho = discrete_density(fs.configuration);
  const auto top = std::max_element(rho.begin(), rho.end());
  const long at = top - rho.begin() + 1;
  EXPECT_TRUE(at == 1 || at == n - 1) << at;
  EXPECT_GT(*top, 1.05);
  EXPECT_LT(*top, 1.10);
  EXPECT_NEAR(rho[n / 2 - 1], 1.0, 0.01);
  const auto e = strain(fs.configuration);
  for (int i = 2; i <= n / 2; ++i) EXPECT_GT(e(i), e(i - 1));
}

TEST(Equilibrium, BandedAndDenseAgree) {
  const auto p = PotentialSpec::power_law(2.0);
  SolverOptions dense, banded;
  dense.hessian = HessianMode::Dense;
  banded.hessian = HessianMode::Banded;
  const auto a = solve_finite(p, 300, dense), b = solve_finite(p, 300, banded);
  EXPECT_EQ(a.report.hessian, "dense");
  EXPECT_EQ(b.report.hessian, "banded:64");
  for (int i = 0; i <= 300; ++i) EXPECT_NEAR(a.configuration.x[i], b.configuration.x[i], 1e-13);
}

TEST(Equilibrium, NonConvergenceCarriesState) {
  SolverOptions opts;
  opts.max_iters = 1;
  try {
    solve_finite(PotentialSpec::power_law(2.0), 64, opts);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.last_iterate().size(), 65u);
    EXPECT_FALSE(e.residual_history().empty());
  }
}

TEST(Equilibrium, OptionValidation) {
  SolverOptions o;
  o.residual_tol = 0.0;
  EXPECT_THROW(solve_finite(PotentialSpec::wall(), 8, o), ParameterError);
  o = {};
  o.backtrack_factor = 1.0;
  EXPECT_THROW(solve_finite(PotentialSpec::wall(), 8, o), ParameterError);
  EXPECT_THROW(solve_finite(PotentialSpec::wall(), 0), ParameterError);
}
