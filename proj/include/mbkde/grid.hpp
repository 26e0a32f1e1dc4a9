#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mbkde {

//! Uniform abscissa lattice `lo, lo + spacing, ..., hi` with `m` points.
class EvaluationGrid
{
public:
  static constexpr std::size_t min_points = 101;

  EvaluationGrid(double lo, double hi, std::size_t m)
    : lo_(lo)
    , hi_(hi)
    , m_(m)
  {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi))
      throw GridError("evaluation grid needs finite lo < hi");
    if (m < min_points)
      throw GridError("evaluation grid needs at least " +
                      std::to_string(min_points) + " points, got " +
                      std::to_string(m));
    spacing_ = (hi - lo) / static_cast<double>(m - 1);
  }

  //! Smallest grid on [lo, hi] whose spacing does not exceed `max_spacing`.
  static EvaluationGrid with_max_spacing(double lo,
                                         double hi,
                                         double max_spacing,
                                         std::size_t max_points = 1u << 20)
  {
    if (!(max_spacing > 0.0))
      throw GridError("grid spacing must be positive");
    const double cells = std::ceil((hi - lo) / max_spacing);
    std::size_t m = min_points;
    if (cells + 1.0 > static_cast<double>(m))
      m = static_cast<std::size_t>(cells) + 1;
    return EvaluationGrid(lo, hi, std::min(m, std::max(max_points, min_points)));
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::size_t size() const { return m_; }
  double spacing() const { return spacing_; }

  double operator[](std::size_t i) const
  {
    return i + 1 == m_ ? hi_ : lo_ + static_cast<double>(i) * spacing_;
  }

  std::vector<double> points() const
  {
    std::vector<double> out(m_);
    for (std::size_t i = 0; i < m_; ++i)
      out[i] = (*this)[i];
    return out;
  }

  bool covers(double a, double b) const { return lo_ <= a && b <= hi_; }

  //! Index range [first, last] of grid points inside [a, b] (clipped).
  std::pair<std::size_t, std::size_t> index_window(double a, double b) const
  {
    const double fa = std::ceil((a - lo_) / spacing_);
    const double fb = std::floor((b - lo_) / spacing_);
    const double top = static_cast<double>(m_ - 1);
    const auto first = static_cast<std::size_t>(std::clamp(fa, 0.0, top));
    const auto last = static_cast<std::size_t>(std::clamp(fb, 0.0, top));
    return { first, last };
  }

  bool operator==(const EvaluationGrid&) const = default;

private:
  double lo_;
  double hi_;
  std::size_t m_;
  double spacing_ = 0.0;
};

//! Trapezoid rule for values tabulated on `grid`.
inline double
trapezoid(const EvaluationGrid& grid, std::span<const double> values)
{
  if (values.size() != grid.size())
    throw GridError("tabulated values do not match the grid size");
  double sum = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i)
    sum += values[i];
  return sum * grid.spacing();
}

//! A function sampled on a uniform grid.
struct TabulatedFunction
{
  EvaluationGrid grid;
  std::vector<double> values;

  template<class F>
  static TabulatedFunction from(const EvaluationGrid& grid, F&& f)
  {
    TabulatedFunction t{ grid, std::vector<double>(grid.size()) };
    for (std::size_t i = 0; i < grid.size(); ++i)
      t.values[i] = f(grid[i]);
    return t;
  }

  double integral() const { return trapezoid(grid, values); }
};

} // namespace mbkde
