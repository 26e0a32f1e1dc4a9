#include <mbkde/kernels.hpp>

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mbkde;

TEST(Kernel, ClosedFormValues)
{
  const Kernel k;
  EXPECT_NEAR(kernel_eval(k, 0.0), 0.3989422804, 1e-10);
  EXPECT_EQ(kernel_eval(k, 1.0), kernel_eval(k, -1.0));
  EXPECT_NEAR(kernel_eval(k, 3.0), 0.00443185, 1e-8);
}

TEST(Kernel, SymmetricOnGrid)
{
  const Kernel k;
  for (int i = 0; i <= 2000; ++i) {
    const double u = -10.0 + 0.01 * i;
    EXPECT_NEAR(k(u), k(-u), 1e-14);
  }
}

TEST(Kernel, UnitMassAndMoments)
{
  const Kernel k;
  auto moment = [&](int ell) {
    return oracle::trapezoid([&](double u) { return std::pow(u, ell) * k(u); }, -15, 15, 30000);
  };
  EXPECT_NEAR(moment(0), 1.0, 1e-10);
  EXPECT_NEAR(kernel_moment(k, 0), 1.0, 0.0);
  EXPECT_NEAR(kernel_moment(k, 2), 1.0, 0.0);
  EXPECT_NEAR(kernel_moment(k, 4), 3.0, 0.0);
  EXPECT_NEAR(moment(2), kernel_moment(k, 2), 1e-10);
  EXPECT_NEAR(moment(4), kernel_moment(k, 4), 1e-9);
  EXPECT_THROW(kernel_moment(k, 3), UnsupportedMomentError);
  EXPECT_THROW(kernel_moment(k, 6), UnsupportedMomentError);
}

TEST(Kernel, ScaledMassAndScalingIdentity)
{
  const Kernel k;
  for (double h : { 0.01, 0.1, 1.0, 10.0 }) {
    const Bandwidth bw(h);
    const double mass = oracle::trapezoid(
      [&](double u) { return kernel_scaled(k, bw, u); }, -15 * h, 15 * h, 30000);
    EXPECT_NEAR(mass, 1.0, 1e-10) << h;
    for (double u : { -3.0, -0.2, 0.0, 0.7, 5.0 })
      EXPECT_NEAR(kernel_scaled(k, bw, u * h), k(u) / h, 1e-14 / h);
  }
}

TEST(Bandwidth, RejectsNonPositive)
{
  EXPECT_THROW(Bandwidth(0.0), DomainError);
  EXPECT_THROW(Bandwidth(-1.0), DomainError);
  EXPECT_THROW(Bandwidth(std::nan("")), DomainError);
  EXPECT_EQ(Bandwidth(0.5).value(), 0.5);
}

TEST(VarianceConstant, MatchesClosedForm)
{
  const double pi = std::numbers::pi;
  // 4 R(K) - 4 int K (K*K) + R(K*K) for the Gaussian kernel
  const double closed =
    4.0 / (2.0 * std::sqrt(pi)) - 4.0 / std::sqrt(6.0 * pi) + 1.0 / (2.0 * std::sqrt(2.0 * pi));
  EXPECT_NEAR(closed, 0.40653, 1e-5);
  EXPECT_NEAR(variance_constant(Kernel{}), closed, 1e-6);
}

TEST(VarianceConstant, IdentitySelfConvolutionGivesRoughness)
{
  const Kernel k;
  const double v = variance_constant(k, [&](double u) { return k(u); });
  EXPECT_NEAR(v, 1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-10);
  EXPECT_NEAR(v, 0.28209, 1e-5);
}

TEST(VarianceConstant, StableUnderRefinement)
{
  const double coarse = variance_constant(Kernel{});
  const double fine = variance_constant(Kernel{}, {}, { 12.0, 9601 });
  EXPECT_LT(std::abs(coarse - fine), 1e-9);
}

TEST(ConvolveNormal, ClosedForms)
{
  EXPECT_NEAR(convolve_kernel_with_normal(Bandwidth(1e-8), 0.0, 1.0, 0.0), 0.3989422804, 1e-8);
  EXPECT_NEAR(convolve_kernel_with_normal(Bandwidth(1.0), 0.0, 1.0, 0.0),
              1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-12);
  EXPECT_THROW(convolve_kernel_with_normal(Bandwidth(1.0), 0.0, 0.0, 0.0), DomainError);
}

TEST(ConvolveNormal, MatchesQuadrature)
{
  const double h = 0.5, mu = 2.0, sigma = 1.5, x = 1.0;
  const double q = oracle::trapezoid(
    [&](double t) { return oracle::kh(x - t, h) * oracle::gauss(t, mu, sigma * sigma); },
    -20.0, 20.0, 40000);
  EXPECT_NEAR(convolve_kernel_with_normal(Bandwidth(h), mu, sigma, x), q, 1e-8);
}

TEST(ConvolveFunction, ConstantIsPreserved)
{
  const EvaluationGrid grid(-10.0, 10.0, 2001);
  const auto g = TabulatedFunction::from(grid, [](double) { return 3.5; });
  for (double x : { -2.0, 0.0, 1.3 }) {
    const auto c = convolve_kernel_with_function(Bandwidth(0.5), g, x);
    EXPECT_NEAR(c.value, 3.5, 1e-8);
    EXPECT_FALSE(c.under_resolved);
  }
}

TEST(ConvolveFunction, AgreesWithClosedFormForNormals)
{
  const EvaluationGrid grid(-15.0, 15.0, 6001);
  for (auto [mu, sigma] : { std::pair{ 0.0, 1.0 }, std::pair{ 1.0, 0.4 }, std::pair{ -2.0, 2.5 } }) {
    const auto g = TabulatedFunction::from(grid, [&](double t) { return normal_pdf(t, mu, sigma); });
    for (double h : { 0.05, 0.3, 1.0 })
      for (double x : { -1.0, 0.0, 0.8 }) {
        const auto c = convolve_kernel_with_function(Bandwidth(h), g, x);
        EXPECT_NEAR(c.value, convolve_kernel_with_normal(Bandwidth(h), mu, sigma, x), 1e-7);
      }
  }
  const auto phi = TabulatedFunction::from(grid, [](double t) { return normal_pdf(t, 0.0, 1.0); });
  EXPECT_NEAR(convolve_kernel_with_function(Bandwidth(1.0), phi, 0.0).value, 0.2820948, 1e-7);
}

TEST(ConvolveFunction, BimodalMatchesComponentwiseClosedForm)
{
  const auto m = mw_density(6);
  const EvaluationGrid grid(-12.0, 12.0, 4801);
  const auto g = TabulatedFunction::from(grid, [&](double t) { return m.pdf(t); });
  const Bandwidth h(0.3);
  double expected = 0.0;
  for (const auto& c : m.components())
    expected += c.weight() * convolve_kernel_with_normal(h, c.mean(), c.sd(), 0.0);
  EXPECT_NEAR(convolve_kernel_with_function(h, g, 0.0).value, expected, 1e-7);
}

TEST(ConvolveFunction, NarrowGridRejected)
{
  const EvaluationGrid grid(-2.0, 2.0, 401);
  const auto g = TabulatedFunction::from(grid, [](double) { return 1.0; });
  EXPECT_THROW(convolve_kernel_with_function(Bandwidth(0.5), g, 0.0), InsufficientSupportError);
  EXPECT_NO_THROW(convolve_kernel_with_function(Bandwidth(0.3), g, 0.0));
}

TEST(ConvolveFunction, ResolutionWarning)
{
  const EvaluationGrid grid(-10.0, 10.0, 201); // spacing 0.1
  const auto g = TabulatedFunction::from(grid, [](double) { return 1.0; });
  EXPECT_TRUE(convolve_kernel_with_function(Bandwidth(0.2), g, 0.0).under_resolved);
  EXPECT_FALSE(convolve_kernel_with_function(Bandwidth(0.4), g, 0.0).under_resolved);
}
