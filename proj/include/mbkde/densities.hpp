#pragma once

#include "errors.hpp"
#include "random.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mbkde {

inline constexpr double inv_sqrt_2pi = 0.39894228040143267794;

//! N(x; mean, sd^2).
inline double
normal_pdf(double x, double mean, double sd)
{
  const double z = (x - mean) / sd;
  return inv_sqrt_2pi / sd * std::exp(-0.5 * z * z);
}

inline double
normal_cdf(double x, double mean, double sd)
{
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

class NormalComponent
{
public:
  NormalComponent(double weight, double mean, double sd)
    : weight_(weight)
    , mean_(mean)
    , sd_(sd)
  {
    if (!(sd > 0.0) || !std::isfinite(sd))
      throw DomainError("normal component needs sd > 0");
    if (!(weight > 0.0 && weight <= 1.0))
      throw DomainError("normal component weight must lie in (0, 1]");
    if (!std::isfinite(mean))
      throw DomainError("normal component mean must be finite");
  }

  double weight() const { return weight_; }
  double mean() const { return mean_; }
  double sd() const { return sd_; }

private:
  double weight_;
  double mean_;
  double sd_;
};

//! Finite normal mixture. Immutable once built.
class NormalMixture
{
public:
  NormalMixture(std::vector<NormalComponent> components, std::string label)
    : components_(std::move(components))
    , label_(std::move(label))
  {
    if (components_.empty())
      throw DomainError("normal mixture needs at least one component");
    double total = 0.0;
    for (const auto& c : components_)
      total += c.weight();
    if (std::abs(total - 1.0) > 1e-12)
      throw DomainError("mixture weights must sum to 1");
  }

  std::span<const NormalComponent> components() const { return components_; }
  const std::string& label() const { return label_; }

  double pdf(double x) const
  {
    double sum = 0.0;
    for (const auto& c : components_)
      sum += c.weight() * normal_pdf(x, c.mean(), c.sd());
    return sum;
  }

  double operator()(double x) const { return pdf(x); }

  double cdf(double x) const
  {
    double sum = 0.0;
    for (const auto& c : components_)
      sum += c.weight() * normal_cdf(x, c.mean(), c.sd());
    return sum;
  }

  double mean() const
  {
    double m = 0.0;
    for (const auto& c : components_)
      m += c.weight() * c.mean();
    return m;
  }

  double variance() const
  {
    const double mu = mean();
    double v = 0.0;
    for (const auto& c : components_) {
      const double d = c.mean() - mu;
      v += c.weight() * (c.sd() * c.sd() + d * d);
    }
    return v;
  }

  double min_sd() const
  {
    double s = components_.front().sd();
    for (const auto& c : components_)
      s = std::min(s, c.sd());
    return s;
  }

  //! [min_k(mean_k - 10 sd_k), max_k(mean_k + 10 sd_k)].
  std::pair<double, double> effective_support() const
  {
    double lo = components_.front().mean() - 10.0 * components_.front().sd();
    double hi = components_.front().mean() + 10.0 * components_.front().sd();
    for (const auto& c : components_) {
      lo = std::min(lo, c.mean() - 10.0 * c.sd());
      hi = std::max(hi, c.mean() + 10.0 * c.sd());
    }
    return { lo, hi };
  }

  //! Map every component through x -> scale * x + shift.
  NormalMixture affine(double scale, double shift) const
  {
    if (!(scale > 0.0))
      throw DomainError("affine scale must be positive");
    std::vector<NormalComponent> out;
    out.reserve(components_.size());
    for (const auto& c : components_)
      out.emplace_back(c.weight(), scale * c.mean() + shift, scale * c.sd());
    return NormalMixture(std::move(out), label_);
  }

private:
  std::vector<NormalComponent> components_;
  std::string label_;
};

inline double
mixture_pdf(const NormalMixture& m, double x)
{
  return m.pdf(x);
}

inline double
mixture_cdf(const NormalMixture& m, double x)
{
  return m.cdf(x);
}

//! n i.i.d. draws in draw order: categorical component pick, then a normal
//! draw from that component.
inline std::vector<double>
mixture_sample(const NormalMixture& m, std::size_t n, RandomStream& rng)
{
  if (n == 0)
    throw EmptySampleError("cannot draw an empty sample");
  const auto comps = m.components();
  std::vector<double> cumulative(comps.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    acc += comps[k].weight();
    cumulative[k] = acc;
  }
  std::vector<double> out(n);
  for (auto& x : out) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t k = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative.begin()), comps.size() - 1);
    x = rng.normal(comps[k].mean(), comps[k].sd());
  }
  return out;
}

namespace detail {

inline std::vector<NormalComponent>
strongly_skewed_components()
{
  std::vector<NormalComponent> c;
  for (int l = 0; l < 8; ++l) {
    const double r = std::pow(2.0 / 3.0, l);
    c.emplace_back(1.0 / 8.0, 3.0 * (r - 1.0), r);
  }
  return c;
}

inline std::vector<NormalComponent>
claw_components()
{
  std::vector<NormalComponent> c{ { 0.5, 0.0, 1.0 } };
  for (int l = 0; l < 5; ++l)
    c.emplace_back(1.0 / 10.0, l / 2.0 - 1.0, 1.0 / 10.0);
  return c;
}

inline bool
iequals(std::string_view a, std::string_view b)
{
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

} // namespace detail

inline constexpr std::array<std::string_view, 10> mw_names = {
  "Gaussian", "Skewed Unimodal", "Strongly Skewed", "Kurtotic Unimodal",
  "Outlier",  "Bimodal",         "Separated Bimodal", "Skewed Bimodal",
  "Trimodal", "Claw"
};

//! Marron-Wand test densities #1-#10.
//!
//! Parameters transcribed from Marron & Wand (1992), "Exact mean integrated
//! squared error", Ann. Statist. 20, Table 1.
inline NormalMixture
mw_density(int id)
{
  using C = NormalComponent;
  std::vector<NormalComponent> c;
  switch (id) {
    case 1:
      c = { C(1.0, 0.0, 1.0) };
      break;
    case 2:
      c = { C(1.0 / 5.0, 0.0, 1.0),
            C(1.0 / 5.0, 1.0 / 2.0, 2.0 / 3.0),
            C(3.0 / 5.0, 13.0 / 12.0, 5.0 / 9.0) };
      break;
    case 3:
      c = detail::strongly_skewed_components();
      break;
    case 4:
      c = { C(2.0 / 3.0, 0.0, 1.0), C(1.0 / 3.0, 0.0, 1.0 / 10.0) };
      break;
    case 5:
      c = { C(1.0 / 10.0, 0.0, 1.0), C(9.0 / 10.0, 0.0, 1.0 / 10.0) };
      break;
    case 6:
      c = { C(0.5, -1.0, 2.0 / 3.0), C(0.5, 1.0, 2.0 / 3.0) };
      break;
    case 7:
      c = { C(0.5, -1.5, 0.5), C(0.5, 1.5, 0.5) };
      break;
    case 8:
      c = { C(3.0 / 4.0, 0.0, 1.0), C(1.0 / 4.0, 3.0 / 2.0, 1.0 / 3.0) };
      break;
    case 9:
      c = { C(9.0 / 20.0, -6.0 / 5.0, 3.0 / 5.0),
            C(9.0 / 20.0, 6.0 / 5.0, 3.0 / 5.0),
            C(1.0 / 10.0, 0.0, 1.0 / 4.0) };
      break;
    case 10:
      c = detail::claw_components();
      break;
    default:
      throw UnknownDensityError("unknown Marron-Wand density id " +
                                std::to_string(id) + " (expected 1..10)");
  }
  return NormalMixture(std::move(c), std::string(mw_names[id - 1]));
}

//! Density id from an id string ("1".."10") or a case-insensitive label.
inline int
mw_density_id(std::string_view key)
{
  for (std::size_t i = 0; i < mw_names.size(); ++i)
    if (detail::iequals(key, mw_names[i]))
      return static_cast<int>(i) + 1;
  int id = 0;
  bool digits = !key.empty() && key.size() <= 2;
  for (char ch : key) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      digits = false;
      break;
    }
    id = id * 10 + (ch - '0');
  }
  if (digits && id >= 1 && id <= 10)
    return id;
  std::string msg = "unknown density '" + std::string(key) + "'; expected 1..10 or one of:";
  for (auto name : mw_names)
    msg += " \"" + std::string(name) + "\"";
  throw UnknownDensityError(msg);
}

inline NormalMixture
mw_density(std::string_view key)
{
  return mw_density(mw_density_id(key));
}

} // namespace mbkde
