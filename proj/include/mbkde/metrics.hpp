#pragma once

#include "densities.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace mbkde {

//! Rules for the ISE quadrature grid at a given bandwidth.
struct GridSpec
{
  //! Spacing is min(h, smallest component sd) / resolution_divisor.
  double resolution_divisor = 4.0;
  //! The grid reaches tail_margin * h beyond the data as well as the
  //! truth's effective support.
  double tail_margin = 9.0;
  std::size_t min_points = 401;
  std::size_t max_points = 1u << 16;
};

inline EvaluationGrid
ise_grid(const NormalMixture& truth, const Sample& s, Bandwidth h, const GridSpec& spec = {})
{
  const auto [slo, shi] = truth.effective_support();
  const double margin = spec.tail_margin * h.value();
  const double lo = std::min(slo, s.min() - margin);
  const double hi = std::max(shi, s.max() + margin);
  const double spacing =
    std::min(h.value(), truth.min_sd()) / spec.resolution_divisor;
  std::size_t m = spec.min_points;
  const double cells = std::ceil((hi - lo) / spacing);
  if (cells + 1.0 > static_cast<double>(m))
    m = cells + 1.0 > static_cast<double>(spec.max_points)
          ? spec.max_points
          : static_cast<std::size_t>(cells) + 1;
  return EvaluationGrid(lo, hi, m);
}

//! Trapezoid quadrature of (estimate - truth)^2 over the estimate's grid.
inline double
ise(const DensityEstimate& est, const NormalMixture& truth)
{
  const auto [slo, shi] = truth.effective_support();
  if (!est.grid.covers(slo, shi))
    throw GridError("estimate grid does not cover the truth's effective support");
  if (est.values.size() != est.grid.size())
    throw GridError("estimate values do not match the grid");
  const auto& g = est.grid;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = est.values[i] - truth.pdf(g[i]);
    const double w = (i == 0 || i + 1 == g.size()) ? 0.5 : 1.0;
    sum += w * d * d;
  }
  return sum * g.spacing();
}

struct BandwidthSearch
{
  std::size_t coarse_points = 40;
  //! Lower end of the coarse pass, as a multiple of sigma_hat * n^(-1/5).
  double lower_factor = 1.0 / 50.0;
  //! Upper end of the coarse pass, as a multiple of the sample range.
  double upper_factor = 2.0;
  //! Golden-section stopping width, relative in h.
  double rel_tol = 1e-3;
  GridSpec grid{};
};

struct OracleResult
{
  double h_star = 0.0;
  double min_ise = 0.0;
  std::size_t evals = 0;
  //! The minimiser sat on an end of the coarse bracket.
  bool boundary = false;
};

//! Coarse-pass bracket [h_lo, h_hi].
inline std::pair<double, double>
bandwidth_bracket(const Sample& s, const BandwidthSearch& search)
{
  const double n = static_cast<double>(s.size());
  if (s.size() < 2 || s.min() == s.max())
    throw SearchFailureError("bandwidth search needs a sample with positive spread");
  const double sd = fit_normal_mle(s).sigma();
  const double lo = search.lower_factor * sd * std::pow(n, -0.2);
  const double hi = std::max(search.upper_factor * s.range(), 10.0 * lo);
  return { lo, hi };
}

//! ISE of one estimator at bandwidth h; +inf when the estimator cannot be
//! formed at that h.
inline double
ise_at(EstimatorKind kind,
       const Sample& s,
       const NormalMixture& truth,
       double h,
       const GridSpec& grid = {})
{
  try {
    const Bandwidth bw(h);
    const double v = ise(estimate({ kind, bw }, s, ise_grid(truth, s, bw, grid)), truth);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

//! Per-sample ISE-minimising bandwidth: log-spaced coarse pass, then
//! golden-section refinement on log h around the best coarse point.
inline OracleResult
oracle_bandwidth(EstimatorKind kind,
                 const Sample& s,
                 const NormalMixture& truth,
                 const BandwidthSearch& search = {})
{
  if (search.coarse_points < 3)
    throw DomainError("bandwidth search needs at least three coarse points");
  const auto [h_lo, h_hi] = bandwidth_bracket(s, search);
  const double log_lo = std::log(h_lo);
  const double log_step =
    (std::log(h_hi) - log_lo) / static_cast<double>(search.coarse_points - 1);

  OracleResult best;
  best.min_ise = std::numeric_limits<double>::infinity();
  auto eval = [&](double log_h) {
    const double h = std::exp(log_h);
    const double v = ise_at(kind, s, truth, h, search.grid);
    ++best.evals;
    if (v < best.min_ise) {
      best.min_ise = v;
      best.h_star = h;
    }
    return v;
  };

  std::vector<double> coarse(search.coarse_points);
  std::size_t arg = 0;
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    coarse[k] = eval(log_lo + log_step * static_cast<double>(k));
    if (coarse[k] < coarse[arg])
      arg = k;
  }
  if (!std::isfinite(coarse[arg]))
    throw SearchFailureError("every coarse bandwidth gave a non-finite ISE");
  best.boundary = arg == 0 || arg + 1 == coarse.size();

  const std::size_t left = arg == 0 ? 0 : arg - 1;
  const std::size_t right = std::min(arg + 1, coarse.size() - 1);
  double a = log_lo + log_step * static_cast<double>(left);
  double b = log_lo + log_step * static_cast<double>(right);
  const double stop = std::log1p(search.rel_tol);
  const double ratio = 1.0 / std::numbers::phi;
  double c = b - (b - a) * ratio;
  double d = a + (b - a) * ratio;
  double fc = eval(c);
  double fd = eval(d);
  while (b - a > stop) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * ratio;
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * ratio;
      fd = eval(d);
    }
  }
  return best;
}

} // namespace mbkde
