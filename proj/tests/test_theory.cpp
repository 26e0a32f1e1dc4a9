#include <mbkde/theory.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mbkde;

namespace {

const double inv_root_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

double
mode_of(const NormalMixture& m)
{
  // golden-section on -pdf over a bracket around the mean
  double a = m.mean() - 2.0, b = m.mean() + 2.0;
  const double r = 1.0 / std::numbers::phi;
  while (b - a > 1e-10) {
    const double c = b - (b - a) * r, d = a + (b - a) * r;
    (m.pdf(c) > m.pdf(d) ? b : a) = (m.pdf(c) > m.pdf(d) ? d : c);
  }
  return 0.5 * (a + b);
}

} // namespace

TEST(Derivatives, MatchAnalyticNormalDerivatives)
{
  const auto grid = theory_grid(mw_density(1));
  const SmoothFunctionOnGrid phi([](double x) { return normal_pdf(x, 0.0, 1.0); }, grid);
  for (double x : { 0.0, 0.5, 2.5, -3.2 }) {
    const double p = normal_pdf(x, 0.0, 1.0);
    const double d2 = (x * x - 1.0) * p;
    const double d4 = (x * x * x * x - 6.0 * x * x + 3.0) * p;
    EXPECT_LT(std::abs(phi.d2(x) - d2), 1e-6 * std::abs(d2)) << x;
    EXPECT_LT(std::abs(phi.d4(x) - d4), 1e-6 * std::abs(d4)) << x;
  }
}

TEST(GeneralBias, VanishesWhenPilotIsTruth)
{
  const auto f = mw_density(3);
  const auto grid = theory_grid(f);
  for (double x : { -2.5, -1.0, 0.0, 0.7 })
    for (int order : { 2, 4 })
      EXPECT_EQ(general_bias_expansion(f, f, Bandwidth(0.3), x, order, grid), 0.0);
}

TEST(GeneralBias, ConstantPilotStandardNormal)
{
  const auto f = mw_density(1);
  const auto grid = theory_grid(f);
  const double h = 0.1;
  const double two = 0.5 * h * h * (-inv_root_2pi);
  const double four = h * h * h * h / 24.0 * 3.0 * (3.0 * inv_root_2pi);
  EXPECT_NEAR(two, -0.0019947, 1e-7);
  EXPECT_NEAR(four, 0.0000149, 1e-7);
  auto one = [](double) { return 1.0; };
  EXPECT_NEAR(general_bias_expansion(f, one, Bandwidth(h), 0.0, 2, grid), two, 1e-11);
  EXPECT_NEAR(general_bias_expansion(f, one, Bandwidth(h), 0.0, 4, grid), two + four, 1e-11);
}

TEST(GeneralBias, ExpansionOrderAgainstExactMean)
{
  struct Case
  {
    int f_id;
    RealFunction g;
    double x;
  };
  const auto f2 = mw_density(2);
  const std::vector<Case> cases = {
    { 2, moment_matched_normal(f2), 0.3 },
    { 2, moment_matched_normal(f2), 1.2 },
    { 6, [](double t) { return normal_pdf(t, 0.2, 1.3); }, 0.4 },
    { 8, mw_density(1), -0.5 },
  };
  const std::vector<double> hs{ 0.4, 0.2, 0.1, 0.05 };
  for (const auto& c : cases) {
    const auto f = mw_density(c.f_id);
    const auto grid = theory_grid(f);
    std::vector<double> r2, r4;
    for (double h : hs) {
      const double exact = oracle::exact_smoothed_mean(f, c.g, h, c.x) - f.pdf(c.x);
      r2.push_back(exact - general_bias_expansion(f, c.g, Bandwidth(h), c.x, 2, grid));
      r4.push_back(exact - general_bias_expansion(f, c.g, Bandwidth(h), c.x, 4, grid));
    }
    EXPECT_GE(oracle::loglog_slope(hs, r2), 3.5) << f.label() << " x=" << c.x;
    EXPECT_GE(oracle::loglog_slope(hs, r4), 5.5) << f.label() << " x=" << c.x;
  }
}

TEST(GeneralBias, Errors)
{
  const auto f = mw_density(1);
  const auto grid = theory_grid(f);
  EXPECT_THROW(general_bias_expansion(f, f, Bandwidth(0.2), 0.0, 3, grid), DomainError);
  EXPECT_THROW(general_bias_expansion(f, f, Bandwidth(0.2), grid.lo() + 0.02, 2, grid), EdgeError);
  EXPECT_NO_THROW(general_bias_expansion(f, f, Bandwidth(0.2), grid.lo() + 0.04, 2, grid));
  EXPECT_THROW(hobskde_bias(f, f, Bandwidth(0.2), grid.hi() - 0.03, grid), EdgeError);
}

TEST(HgBias, CorrectVehicleZero)
{
  const auto f = mw_density(1);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  for (double x : { -2.0, 0.0, 1.5 })
    EXPECT_EQ(hg_bias(f, f0, Bandwidth(0.4), x, grid), 0.0);
}

TEST(HgBias, IsOrderTwoTermOfGeneralExpansion)
{
  const auto f = mw_density(2);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  const double x = mode_of(f);
  EXPECT_EQ(hg_bias(f, f0, Bandwidth(0.3), x, grid),
            general_bias_expansion(f, f0, Bandwidth(0.3), x, 2, grid));
}

TEST(HgBias, BimodalAgainstFinerStencil)
{
  const auto f = mw_density(6);
  const double sd = std::sqrt(f.variance());
  auto f0 = [sd](double t) { return oracle::gauss(t, 0.0, sd * sd); };
  const double h = 0.2, x = 0.0, d = 1e-3;
  auto q = [&](double t) { return f.pdf(t) / f0(t); };
  const double q2 = (q(x + d) - 2.0 * q(x) + q(x - d)) / (d * d);
  const double expected = 0.5 * h * h * f0(x) * q2;
  EXPECT_NEAR(hg_bias(f, f0, Bandwidth(h), x, theory_grid(f)), expected, 1e-6);
}

TEST(HgBias, ScalesAsHSquared)
{
  const auto f = mw_density(9);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  for (double x : { -1.0, 0.3 })
    EXPECT_EQ(hg_bias(f, f0, Bandwidth(0.2), x, grid) / 4.0,
              hg_bias(f, f0, Bandwidth(0.1), x, grid));
}

TEST(HobskdeBias, CorrectVehicleZero)
{
  const auto f = mw_density(1);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  for (int i = 0; i < 50; ++i) {
    const double x = -4.0 + 8.0 * i / 49.0;
    EXPECT_EQ(hobskde_bias(f, f0, Bandwidth(0.3), x, grid), 0.0);
    EXPECT_EQ(hobskde_renorm_bias(f, f0, Bandwidth(0.3), x, grid, 0.0), 0.0);
  }
  EXPECT_EQ(vehicle_curvature_integral(f, f0, grid), 0.0);
}

TEST(HobskdeBias, HalvingBandwidthDividesBySixteen)
{
  const auto f = mw_density(2);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  for (double x : { 0.0, 0.8, 1.4 }) {
    const double big = hobskde_bias(f, f0, Bandwidth(0.4), x, grid);
    EXPECT_NE(big, 0.0);
    EXPECT_EQ(big / 16.0, hobskde_bias(f, f0, Bandwidth(0.2), x, grid));
  }
}

TEST(HobskdeBias, MatchesCompositionOfGeneralExpansion)
{
  // Feed the semiparametric mean f + hg_bias back in as the pilot of the
  // general expansion; its h^4 coefficient, isolated by Richardson
  // extrapolation over two small bandwidths, is the h^4 bias.
  const auto f = mw_density(6);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  const double h = 0.3, x = 0.5;
  auto composed = [&](double hp) {
    RealFunction g = [&, hp](double y) {
      return f.pdf(y) + general_bias_expansion(f, f0, Bandwidth(hp), y, 2, grid);
    };
    return general_bias_expansion(f, g, Bandwidth(hp), x, 2, grid);
  };
  const double b4 = composed(h / 4.0), b8 = composed(h / 8.0);
  const double extrapolated = (64.0 * b8 - b4) * 256.0 / 3.0;
  const double value = hobskde_bias(f, f0, Bandwidth(h), x, grid);
  EXPECT_NEAR(value, extrapolated, 1e-5);
  EXPECT_GT(std::abs(value), 1e-4);
}

TEST(HobskdeRenormBias, CorrectionIntegratesOut)
{
  const auto f = mw_density(2);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  const Bandwidth h(0.2);
  const double integral = vehicle_curvature_integral(f, f0, grid);
  double total = 0.0;
  for (std::size_t i = 4; i + 4 < grid.size(); ++i)
    total += hobskde_renorm_bias(f, f0, h, grid[i], grid, integral);
  total *= grid.spacing();
  EXPECT_NEAR(total, 0.0, 1e-6);
}

TEST(HobskdeRenormBias, DiffersByMultipleOfDensity)
{
  const auto f = mw_density(2);
  const auto f0 = moment_matched_normal(f);
  const auto grid = theory_grid(f);
  const Bandwidth h(0.2);
  const double mode = mode_of(f);
  std::vector<double> ratios;
  for (int i = 0; i < 10; ++i) {
    const double x = mode - 1.0 + 0.2 * i;
    ratios.push_back((hobskde_renorm_bias(f, f0, h, x, grid) - hobskde_bias(f, f0, h, x, grid)) /
                     f.pdf(x));
  }
  for (double r : ratios)
    EXPECT_NEAR(r, ratios.front(), 1e-8);
  EXPECT_NE(ratios.front(), 0.0);
}

TEST(AsymptoticVariance, Values)
{
  const auto f = mw_density(1);
  const double v = asymptotic_variance(f, 100, Bandwidth(0.3), 0.0);
  EXPECT_NEAR(v, 0.005406, 1e-6);
  EXPECT_NEAR(v, f.pdf(0.0) * 0.4065325753726675 / 30.0, 1e-9);
  EXPECT_EQ(asymptotic_variance(f, 200, Bandwidth(0.3), 0.0), v / 2.0);
  EXPECT_THROW(asymptotic_variance(f, 0, Bandwidth(0.3), 0.0), DomainError);
}
