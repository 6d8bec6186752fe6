#include <numbers>
#include <vector>

#include "common.hpp"
#include "pileup/potential.hpp"

using namespace pileup;

namespace {

std::vector<double> log_grid(double lo, double hi, int m) {
  std::vector<double> g;
  for (int k = 0; k < m; ++k) g.push_back(lo * std::pow(hi / lo, double(k) / (m - 1)));
  return g;
}

}  // namespace

TEST(Potential, PowerLawClosedForm) {
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_DOUBLE_EQ(p.eval(0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(p.eval(1, 1.0), -2.0);
  EXPECT_DOUBLE_EQ(p.eval(2, 1.0), 6.0);
  EXPECT_DOUBLE_EQ(p.eval(3, 1.0), -24.0);
  EXPECT_DOUBLE_EQ(p.eval(0, 2.0), 0.25);
  EXPECT_DOUBLE_EQ(lambda_modulus(p, 2.0), 0.375);
  EXPECT_DOUBLE_EQ(lambda_modulus(PotentialSpec::power_law(3.0), 1.0), 12.0);
}

TEST(Potential, WallReferenceValues) {
  const auto w = PotentialSpec::wall();
  EXPECT_REL(w.eval(0, 1.0), 0.45844874336819036, 1e-14);
  EXPECT_REL(w.eval(1, 1.0), -0.72406166096631047, 1e-14);
  EXPECT_REL(w.eval(2, 1.0), 1.1773753584857285, 1e-14);
  EXPECT_REL(w.eval(3, 1.0), -2.2389643382489178, 1e-14);
  EXPECT_REL(lambda_modulus(w, 1.0), 1.1773753584857285, 1e-14);
}

TEST(Potential, WallKeepsRelativeAccuracyFarOut) {
  const auto w = PotentialSpec::wall();
  EXPECT_REL(w.eval(0, 20.0), 1.7418252446695515e-16, 1e-12);
  EXPECT_REL(w.eval(1, 20.0), -3.3986834042332712e-16, 1e-12);
  EXPECT_EQ(w.eval(0, 400.0), 0.0);
  EXPECT_EQ(w.eval(2, 400.0), 0.0);
}

TEST(Potential, DomainAndParameterErrors) {
  const auto p = PotentialSpec::power_law(2.0);
  EXPECT_THROW(p.eval(0, 0.0), DomainError);
  EXPECT_THROW(p.eval(1, -1.0), DomainError);
  EXPECT_THROW(p.eval(4, 1.0), DomainError);
  EXPECT_THROW(PotentialSpec::wall().eval(0, 0.0), DomainError);
  EXPECT_THROW(PotentialSpec::power_law(1.0), ParameterError);
  EXPECT_THROW(PotentialSpec::power_law(0.5), ParameterError);
  EXPECT_THROW(lambda_modulus(p, 0.0), DomainError);
}

TEST(Potential, ParseRoundTrip) {
  EXPECT_DOUBLE_EQ(PotentialSpec::parse("powerlaw:a=2.5").a(), 2.5);
  EXPECT_FALSE(PotentialSpec::parse("wall").is_power_law());
  const auto p = PotentialSpec::power_law(1.2);
  EXPECT_EQ(PotentialSpec::parse(p.to_string()).a(), 1.2);
  EXPECT_THROW(PotentialSpec::parse("powerlaw:a=2x"), ParameterError);
  EXPECT_THROW(PotentialSpec::parse("powerlaw:a="), ParameterError);
  EXPECT_THROW(PotentialSpec::parse("coulomb"), ParameterError);
  EXPECT_THROW(PotentialSpec::parse("powerlaw:a=1"), ParameterError);
}

TEST(Potential, DerivativesMatchFiniteDifferences) {
  const auto grid = log_grid(0.3, 50.0, 60);
  for (const auto& p : {PotentialSpec::power_law(1.2), PotentialSpec::power_law(2.0), PotentialSpec::power_law(3.5),
                        PotentialSpec::wall()}) {
    const ValidationReport r = check_derivatives(p, grid, 1e-6);
    EXPECT_TRUE(r.passed) << p.to_string() << " errors " << r.max_rel_error[0] << ' ' << r.max_rel_error[1] << ' '
                          << r.max_rel_error[2];
    EXPECT_TRUE(r.second_derivative_decreasing);
  }
  EXPECT_THROW(check_derivatives(PotentialSpec::wall(), std::vector<double>{}, 1e-6), ParameterError);
}

TEST(Potential, RepulsiveAndConvex) {
  for (const auto& p : {PotentialSpec::power_law(1.5), PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (double x : log_grid(0.05, 30.0, 200)) {
      EXPECT_GT(p.value(x), 0.0);
      EXPECT_LT(p.d1(x), 0.0);
      EXPECT_GT(p.d2(x), 0.0);
    }
    EXPECT_TRUE(third_derivative_nonpositive(p, log_grid(0.05, 300.0, 300)));
  }
}

TEST(Potential, PowerLawDecayRate) {
  for (double a : {1.2, 2.0, 3.0}) {
    const auto p = PotentialSpec::power_law(a);
    for (double x : {10.0, 1e3, 1e6}) EXPECT_REL(p.d2(x) * std::pow(x, a + 2.0), a * (a + 1.0), 1e-13);
  }
}

// V''(x) = 8x e^{-2x} (1 + O(1/x)); the rescaled ratio stays between fixed bounds.
TEST(Potential, WallDecaysExponentially) {
  const auto w = PotentialSpec::wall();
  for (double x : {10.0, 20.0, 40.0, 80.0, 160.0}) {
    const double r = w.d2(x) * std::exp(2.0 * x) / x;
    EXPECT_GT(r, 7.0) << x;
    EXPECT_LT(r, 8.0) << x;
  }
}

TEST(Potential, LambdaIsInfimumOfCurvature) {
  for (const auto& p : {PotentialSpec::power_law(2.0), PotentialSpec::wall()}) {
    for (double x : {0.5, 1.0, 2.0, 5.0}) {
      const double lam = lambda_modulus(p, x);
      for (int k = 1; k <= 400; ++k) EXPECT_GE(p.d2(x * k / 400.0), lam - 1e-12 * lam);
    }
  }
}
