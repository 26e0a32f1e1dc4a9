#pragma once

#include "densities.hpp"
#include "errors.hpp"
#include "grid.hpp"

#include <cmath>
#include <functional>
#include <optional>

namespace mbkde {

enum class KernelFamily
{
  gaussian
};

//! Symmetric probability density used as the smoothing kernel.
struct Kernel
{
  KernelFamily family = KernelFamily::gaussian;

  double operator()(double u) const { return inv_sqrt_2pi * std::exp(-0.5 * u * u); }

  //! (K * K)(u).
  double self_convolution(double u) const
  {
    return normal_pdf(u, 0.0, std::numbers::sqrt2);
  }

  //! Half-width (in units of h) beyond which K is treated as zero.
  static constexpr double cutoff = 10.0;
};

//! Smoothing parameter h > 0.
class Bandwidth
{
public:
  explicit Bandwidth(double h)
    : h_(h)
  {
    if (!(h > 0.0) || !std::isfinite(h))
      throw DomainError("bandwidth must be finite and positive");
  }

  double value() const { return h_; }
  operator double() const { return h_; }

private:
  double h_;
};

inline double
kernel_eval(const Kernel& k, double u)
{
  return k(u);
}

//! K_h(u) = K(u / h) / h.
inline double
kernel_scaled(const Kernel& k, Bandwidth h, double u)
{
  return k(u / h.value()) / h.value();
}

//! s_l = integral of u^l K(u).
inline double
kernel_moment(const Kernel& k, int ell)
{
  (void)k;
  switch (ell) {
    case 0:
      return 1.0;
    case 2:
      return 1.0;
    case 4:
      return 3.0;
    default:
      throw UnsupportedMomentError("kernel moment s_" + std::to_string(ell) +
                                   " is not tabulated (supported: 0, 2, 4)");
  }
}

struct VarianceConstantOptions
{
  double half_range = 12.0;
  std::size_t points = 4801;
};

//! Integral of (2K(u) - (K*K)(u))^2 by trapezoid quadrature. `self_conv`
//! replaces K*K when given.
inline double
variance_constant(const Kernel& k,
                  const std::function<double(double)>& self_conv = {},
                  VarianceConstantOptions opt = {})
{
  const EvaluationGrid grid(-opt.half_range, opt.half_range, opt.points);
  const auto integrand = TabulatedFunction::from(grid, [&](double u) {
    const double kk = self_conv ? self_conv(u) : k.self_convolution(u);
    const double d = 2.0 * k(u) - kk;
    return d * d;
  });
  return integrand.integral();
}

//! (K_h * N(.; mu, sigma^2))(x) = N(x; mu, sigma^2 + h^2).
inline double
convolve_kernel_with_normal(Bandwidth h, double mu, double sigma, double x)
{
  if (!(sigma > 0.0))
    throw DomainError("normal convolvee needs sigma > 0");
  return normal_pdf(x, mu, std::hypot(sigma, h.value()));
}

struct Convolution
{
  double value = 0.0;
  //! Grid spacing exceeded h / 4.
  bool under_resolved = false;
};

//! Trapezoid quadrature of (K_h * g)(x) on the tabulation grid of g.
inline Convolution
convolve_kernel_with_function(Bandwidth h, const TabulatedFunction& g, double x)
{
  const double hv = h.value();
  const auto& grid = g.grid;
  if (!grid.covers(x - 6.0 * hv, x + 6.0 * hv))
    throw InsufficientSupportError(
      "tabulation grid must extend at least 6h beyond the convolution point");
  const auto [first, last] =
    grid.index_window(x - Kernel::cutoff * hv, x + Kernel::cutoff * hv);
  const Kernel k;
  double sum = 0.0;
  for (std::size_t j = first; j <= last; ++j) {
    const double w = (j == 0 || j + 1 == grid.size()) ? 0.5 : 1.0;
    sum += w * k((x - grid[j]) / hv) * g.values[j];
  }
  return { sum * grid.spacing() / hv, grid.spacing() > 0.25 * hv };
}

} // namespace mbkde
