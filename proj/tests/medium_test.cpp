#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "polcnot/medium.hpp"

namespace polcnot {
namespace {

Solution natural_solution() {
  Solution s;
  s.units = UnitSystem::natural;
  return s;  // n = p = kT = 1
}

FieldConfig field(double E_C, double gamma = 0.0) {
  FieldConfig f;
  f.E_C = E_C;
  f.gamma = LinearPolarizationAngle(gamma);
  f.ideal_b = true;
  return f;
}

TEST(LangevinDebye, PrintedFormula) {
  const Solution s = natural_solution();
  EXPECT_EQ(langevin_debye_polarization(s, 0.0), 0.0);
  EXPECT_NEAR(langevin_debye_polarization(s, 1.0), 2.221441469079183, 1e-12);
  EXPECT_DOUBLE_EQ(langevin_debye_polarization(s, 2.0), 2.0 * langevin_debye_polarization(s, 1.0));
}

TEST(LangevinDebye, SiValueMatchesDirectEvaluation) {
  Solution s;
  s.molecule.p = 1e-29;
  s.n = 6e26;
  s.T = 300.0;
  const double expected = oracle::langevin_debye(6e26, 1e-29, 1e6, 1.380649e-23 * 300.0);
  EXPECT_NEAR(langevin_debye_polarization(s, 1e6), expected, 1e-15 * expected);
}

TEST(LangevinDebye, ScalingLaws) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 200; ++i) {
    Solution s = natural_solution();
    s.n = u(rng);
    s.T = u(rng);
    s.molecule.p = u(rng);
    const double E = u(rng);
    const double c = u(rng);
    const double base = langevin_debye_polarization(s, E);
    EXPECT_NEAR(langevin_debye_polarization(s, c * E), c * base, 1e-13 * c * base);
    Solution dense = s;
    dense.n *= c;
    EXPECT_NEAR(langevin_debye_polarization(dense, E), c * base, 1e-13 * c * base);
    Solution hot = s;
    hot.T *= c;
    EXPECT_NEAR(langevin_debye_polarization(hot, E), base / c, 1e-13 * base / c);
  }
}

TEST(LangevinDebye, RejectsInvalidInputs) {
  Solution s = natural_solution();
  EXPECT_THROW(langevin_debye_polarization(s, -1.0), InvalidArgument);
  s.T = 0.0;
  EXPECT_THROW(langevin_debye_polarization(s, 1.0), InvalidArgument);
  s = natural_solution();
  s.molecule.p = 0.0;
  EXPECT_THROW(langevin_debye_polarization(s, 1.0), InvalidArgument);
}

TEST(OrientationPdf, UniformAtZeroField) {
  const auto pdf = orientation_pdf(natural_solution(), field(0.0));
  for (double phi = 0.0; phi < 2.0 * kPi; phi += 0.1) {
    EXPECT_NEAR(pdf(phi), 1.0 / (2.0 * kPi), 1e-15);
  }
}

TEST(OrientationPdf, PeaksAtGammaAndIsNormalized) {
  for (double x : {0.05, 1.0, 5.0, 100.0, 1000.0}) {
    const double gamma = 0.7;
    const auto pdf = orientation_pdf(natural_solution(), field(x, gamma));
    EXPECT_GT(pdf(gamma), pdf(gamma + 0.01));
    EXPECT_GT(pdf(gamma), pdf(gamma - 0.01));
    const double integral = oracle::simpson(pdf, gamma - kPi, gamma + kPi, 20000);
    EXPECT_NEAR(integral, 1.0, 1e-10) << "x = " << x;
  }
}

TEST(MeanDipoleAlignment, MatchesBesselSeries) {
  for (double x : {1e-4, 0.05, 0.1, 1.0, 5.0, 20.0}) {
    EXPECT_NEAR(mean_dipole_alignment(x), oracle::bessel_ratio(x), 1e-13) << x;
  }
  EXPECT_NEAR(mean_dipole_alignment(1000.0), oracle::bessel_ratio_asymptotic(1000.0), 1e-9);
  EXPECT_NEAR(mean_dipole_alignment(5000.0), oracle::bessel_ratio_asymptotic(5000.0), 1e-11);
}

TEST(McMeanPolarization, StatisticalZeroAtZeroField) {
  const std::uint64_t samples = 200000;
  const auto mc = mc_mean_polarization(natural_solution(), field(0.0), samples, 3);
  EXPECT_LT(mc.magnitude, 3.0 / std::sqrt(static_cast<double>(samples)));
}

TEST(McMeanPolarization, MatchesBesselRatioAtSmallBias) {
  const auto mc = mc_mean_polarization(natural_solution(), field(0.1), 1000000, 1);
  EXPECT_NEAR(oracle::bessel_ratio(0.1), 0.0499376039879389, 1e-15);
  EXPECT_LT(std::abs(mc.magnitude - oracle::bessel_ratio(0.1)), 3.0 * mc.standard_error);
}

TEST(McMeanPolarization, ApproachesOneAtLargeBias) {
  const auto mc = mc_mean_polarization(natural_solution(), field(100.0), 1000000, 2);
  const double expected = oracle::bessel_ratio_asymptotic(100.0);
  EXPECT_NEAR(expected, 0.995, 1e-4);
  EXPECT_LT(std::abs(mc.projection - expected), 3.0 * mc.standard_error);
}

TEST(McMeanPolarization, MagnitudeAndDirectionAcrossBiases) {
  Solution s = natural_solution();
  s.n = 2.5;
  s.molecule.p = 0.5;  // scale n p = 1.25; E_C chosen so that x = p E_C
  for (double x : {0.5, 1.0, 5.0}) {
    const double gamma = 2.0;
    const auto mc = mc_mean_polarization(s, field(x / s.molecule.p, gamma), 200000, 9);
    const double expected = s.n * s.molecule.p * oracle::bessel_ratio(x);
    EXPECT_LT(std::abs(mc.projection - expected), 3.0 * mc.standard_error) << x;
    // Angular standard error of the mean direction ~ se / |P|.
    EXPECT_LT(mod_pi_distance(mc.direction, LinearPolarizationAngle(gamma)),
              3.0 * mc.standard_error / mc.magnitude + 1e-12)
        << x;
  }
}

TEST(McMeanPolarization, DeterministicAndThreadIndependent) {
  const Solution s = natural_solution();
  const auto a = mc_mean_polarization(s, field(0.3), 300000, 42, 1);
  const auto b = mc_mean_polarization(s, field(0.3), 300000, 42, 4);
  const auto c = mc_mean_polarization(s, field(0.3), 300000, 42, 1);
  EXPECT_EQ(a.magnitude, b.magnitude);
  EXPECT_EQ(a.projection, b.projection);
  EXPECT_EQ(a.direction, b.direction);
  EXPECT_EQ(a.magnitude, c.magnitude);
  const auto d = mc_mean_polarization(s, field(0.3), 300000, 43, 1);
  EXPECT_NE(a.magnitude, d.magnitude);
}

TEST(McMeanPolarization, RejectsZeroSamples) {
  EXPECT_THROW(mc_mean_polarization(natural_solution(), field(1.0), 0, 0), InvalidArgument);
}

TEST(OracleCompare, ZeroFieldReportsUndefinedRatio) {
  const auto r = oracle_compare(natural_solution(), 0.0, 1000, 0);
  EXPECT_EQ(r.formula_polarization, 0.0);
  EXPECT_EQ(r.mc_polarization, 0.0);
  EXPECT_FALSE(r.ratio.has_value());
}

TEST(OracleCompare, RatioIndependentOfDensity) {
  Solution s = natural_solution();
  const auto a = oracle_compare(s, 0.05, 100000, 5);
  s.n = 17.0;
  const auto b = oracle_compare(s, 0.05, 100000, 5);
  ASSERT_TRUE(a.ratio && b.ratio);
  EXPECT_NEAR(*a.ratio, *b.ratio, 1e-12 * *a.ratio);
}

TEST(OrderParameter, LangevinFunctionValues) {
  TriactiveMolecule mol;
  EXPECT_EQ(b_field_order_parameter(mol, 0.0, 1.0, UnitSystem::natural), 0.0);
  EXPECT_NEAR(b_field_order_parameter(mol, 1e-9, 1.0, UnitSystem::natural), 1e-9 / 3.0, 1e-24);
  EXPECT_NEAR(b_field_order_parameter(mol, 1.0, 1.0, UnitSystem::natural), 0.313035285499331, 1e-14);
  EXPECT_NEAR(b_field_order_parameter(mol, 1000.0, 1.0, UnitSystem::natural), 0.999, 1e-15);
  // Continuity across the series/closed-form switch points.
  EXPECT_NEAR(langevin_function(1e-3 - 1e-12), langevin_function(1e-3 + 1e-12), 1e-12);
  // Slope there is about 1/x^2.
  EXPECT_NEAR(langevin_function(40.0 - 1e-9), langevin_function(40.0 + 1e-9), 2e-12);
  EXPECT_NEAR(langevin_function(40.0), 1.0 / std::tanh(40.0) - 1.0 / 40.0, 1e-16);
}

TEST(OrderParameter, MonotoneInFieldAndInverseTemperature) {
  TriactiveMolecule mol;
  double prev = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double a = b_field_order_parameter(mol, 0.05 * i, 1.0, UnitSystem::natural);
    EXPECT_GE(a, prev);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
    prev = a;
  }
  prev = 2.0;
  for (int i = 1; i <= 200; ++i) {
    const double a = b_field_order_parameter(mol, 1.0, 0.05 * i, UnitSystem::natural);
    EXPECT_LE(a, prev);
    prev = a;
  }
}

TEST(OrderParameter, IdealModeIsOne) {
  Solution s = natural_solution();
  FieldConfig f = field(1.0);
  EXPECT_EQ(order_parameter(s, f), 1.0);
  f.ideal_b = false;
  f.B = 1.0;
  EXPECT_NEAR(order_parameter(s, f), 0.313035285499331, 1e-14);
}

}  // namespace
}  // namespace polcnot
