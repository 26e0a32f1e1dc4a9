#pragma once

#include "densities.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "parametric.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <string>

// Asymptotic bias and variance of multiplicatively corrected estimators.
//
// Derivatives are fourth-order central differences with step equal to the
// spacing of a uniform grid; the grid also bounds where derivatives may be
// taken. Bias evaluators need x to stay four steps inside the grid.

namespace mbkde {

using RealFunction = std::function<double(double)>;

class SmoothFunctionOnGrid
{
public:
  SmoothFunctionOnGrid(RealFunction f, EvaluationGrid grid)
    : f_(std::move(f))
    , grid_(grid)
  {}

  const EvaluationGrid& grid() const { return grid_; }
  double step() const { return grid_.spacing(); }

  double value(double x) const { return f_(x); }
  double operator()(double x) const { return f_(x); }

  double d2(double x) const
  {
    require_inside(x, 2);
    const double d = step();
    return (-f_(x + 2 * d) + 16.0 * f_(x + d) - 30.0 * f_(x) + 16.0 * f_(x - d) -
            f_(x - 2 * d)) /
           (12.0 * d * d);
  }

  double d4(double x) const
  {
    require_inside(x, 3);
    const double d = step();
    const double s3 = f_(x + 3 * d) + f_(x - 3 * d);
    const double s2 = f_(x + 2 * d) + f_(x - 2 * d);
    const double s1 = f_(x + d) + f_(x - d);
    return (-s3 + 12.0 * s2 - 39.0 * s1 + 56.0 * f_(x)) / (6.0 * d * d * d * d);
  }

  TabulatedFunction tabulate() const { return TabulatedFunction::from(grid_, f_); }

  void require_inside(double x, int steps) const
  {
    const double reach = steps * step();
    // allow for rounding when x is itself a grid point
    const double slack = 1e-9 * step();
    if (x - reach < grid_.lo() - slack || x + reach > grid_.hi() + slack)
      throw EdgeError("x = " + std::to_string(x) + " is within " +
                      std::to_string(steps) + " stencil steps of the grid edge");
  }

private:
  RealFunction f_;
  EvaluationGrid grid_;
};

//! Default derivative grid: effective support of f with step 0.01.
inline EvaluationGrid
theory_grid(const NormalMixture& f, double step = 0.01)
{
  const auto [lo, hi] = f.effective_support();
  const double cells = std::round((hi - lo) / step);
  return EvaluationGrid(lo, lo + cells * step, static_cast<std::size_t>(cells) + 1);
}

namespace detail {

inline void
require_interior(const EvaluationGrid& grid, double x)
{
  SmoothFunctionOnGrid([](double) { return 0.0; }, grid).require_inside(x, 4);
}

} // namespace detail

//! The h^order term alone of the bias expansion below.
inline double
bias_expansion_term(const RealFunction& f,
                    const RealFunction& g,
                    Bandwidth h,
                    double x,
                    int order,
                    const EvaluationGrid& grid,
                    const Kernel& k = {})
{
  if (order != 2 && order != 4)
    throw DomainError("bias expansion order must be 2 or 4");
  detail::require_interior(grid, x);
  const SmoothFunctionOnGrid ratio([&](double y) { return f(y) / g(y); }, grid);
  const double hv = h.value();
  if (order == 2)
    return 0.5 * hv * hv * kernel_moment(k, 2) * g(x) * ratio.d2(x);
  return hv * hv * hv * hv / 24.0 * kernel_moment(k, 4) * g(x) * ratio.d4(x);
}

//! Mean of g(x) n^-1 sum K_h(x - X_i) / g(X_i) minus f(x), expanded to
//! order h^2 or h^4.
inline double
general_bias_expansion(const RealFunction& f,
                       const RealFunction& g,
                       Bandwidth h,
                       double x,
                       int order,
                       const EvaluationGrid& grid,
                       const Kernel& k = {})
{
  if (order != 2 && order != 4)
    throw DomainError("bias expansion order must be 2 or 4");
  double bias = bias_expansion_term(f, g, h, x, 2, grid, k);
  if (order == 4)
    bias += bias_expansion_term(f, g, h, x, 4, grid, k);
  return bias;
}

//! Leading bias of the raw semiparametric estimator with vehicle f0.
inline double
hg_bias(const RealFunction& f,
        const RealFunction& f0,
        Bandwidth h,
        double x,
        const EvaluationGrid& grid,
        const Kernel& k = {})
{
  return general_bias_expansion(f, f0, h, x, 2, grid, k);
}

//! (f0 / f)(y) (f / f0)''(y).
inline SmoothFunctionOnGrid
vehicle_curvature(const RealFunction& f, const RealFunction& f0, const EvaluationGrid& grid)
{
  auto ratio = std::make_shared<SmoothFunctionOnGrid>(
    [f, f0](double y) { return f(y) / f0(y); }, grid);
  return SmoothFunctionOnGrid(
    [ratio, f, f0](double y) { return f0(y) / f(y) * ratio->d2(y); }, grid);
}

//! Leading h^4 bias of the raw higher-order semiparametric estimator.
inline double
hobskde_bias(const RealFunction& f,
             const RealFunction& f0,
             Bandwidth h,
             double x,
             const EvaluationGrid& grid,
             const Kernel& k = {})
{
  detail::require_interior(grid, x);
  const auto r = vehicle_curvature(f, f0, grid);
  const double hv = h.value();
  const double s2 = kernel_moment(k, 2);
  return -0.25 * hv * hv * hv * hv * s2 * s2 * f(x) * r.d2(x);
}

//! Integral of f(z) {(f0/f)(z) (f/f0)''(z)}'' over the grid interior.
inline double
vehicle_curvature_integral(const RealFunction& f,
                           const RealFunction& f0,
                           const EvaluationGrid& grid)
{
  const auto r = vehicle_curvature(f, f0, grid);
  double sum = 0.0;
  for (std::size_t i = 4; i + 4 < grid.size(); ++i) {
    const double z = grid[i];
    sum += f(z) * r.d2(z);
  }
  return sum * grid.spacing();
}

//! Leading bias of the renormalised higher-order semiparametric estimator,
//! with the curvature integral supplied by the caller.
inline double
hobskde_renorm_bias(const RealFunction& f,
                    const RealFunction& f0,
                    Bandwidth h,
                    double x,
                    const EvaluationGrid& grid,
                    double curvature_integral,
                    const Kernel& k = {})
{
  const double hv = h.value();
  const double s2 = kernel_moment(k, 2);
  return hobskde_bias(f, f0, h, x, grid, k) +
         0.25 * hv * hv * hv * hv * s2 * s2 * f(x) * curvature_integral;
}

inline double
hobskde_renorm_bias(const RealFunction& f,
                    const RealFunction& f0,
                    Bandwidth h,
                    double x,
                    const EvaluationGrid& grid,
                    const Kernel& k = {})
{
  return hobskde_renorm_bias(
    f, f0, h, x, grid, vehicle_curvature_integral(f, f0, grid), k);
}

//! (nh)^-1 f(x) times the integral of (2K - K*K)^2.
inline double
asymptotic_variance(double fx, std::size_t n, Bandwidth h, const Kernel& k = {})
{
  if (n == 0)
    throw DomainError("asymptotic variance needs n >= 1");
  static const double constant = variance_constant(Kernel{});
  const double c = k.family == KernelFamily::gaussian ? constant : variance_constant(k);
  return fx * c / (static_cast<double>(n) * h.value());
}

inline double
asymptotic_variance(const RealFunction& f,
                    std::size_t n,
                    Bandwidth h,
                    double x,
                    const Kernel& k = {})
{
  return asymptotic_variance(f(x), n, h, k);
}

} // namespace mbkde
