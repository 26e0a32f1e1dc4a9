#pragma once

#include "densities.hpp"
#include "errors.hpp"

#include <cmath>

namespace mbkde {

//! Normal vehicle density f(x; mu, sigma).
class ParametricFit
{
public:
  ParametricFit(double mu, double sigma)
    : mu_(mu)
    , sigma_(sigma)
  {
    if (!(sigma > 0.0) || !std::isfinite(sigma) || !std::isfinite(mu))
      throw DomainError("parametric fit needs finite mu and sigma > 0");
  }

  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

  // Same expression as a unit-weight mixture component so that f / f0 is
  // exactly one when f0 was matched to a single normal.
  double pdf(double x) const { return 1.0 * normal_pdf(x, mu_, sigma_); }
  double operator()(double x) const { return pdf(x); }

private:
  double mu_;
  double sigma_;
};

//! The normal with the mixture's mean and variance (the MLE limit).
inline ParametricFit
moment_matched_normal(const NormalMixture& m)
{
  return ParametricFit(m.mean(), std::sqrt(m.variance()));
}

} // namespace mbkde
