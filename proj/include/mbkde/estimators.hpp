#pragma once

#include "densities.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "kernels.hpp"
#include "parametric.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mbkde {

//! Observed data X_1..X_n, stored sorted so that every estimate is
//! independent of the order in which the values were supplied.
class Sample
{
public:
  explicit Sample(std::vector<double> values)
  {
    if (values.empty())
      throw EmptySampleError("sample is empty");
    for (double v : values)
      if (!std::isfinite(v))
        throw DomainError("sample values must be finite");
    std::sort(values.begin(), values.end());
    values_ = std::make_shared<const std::vector<double>>(std::move(values));
  }

  std::span<const double> values() const { return *values_; }
  std::size_t size() const { return values_->size(); }
  double min() const { return values_->front(); }
  double max() const { return values_->back(); }
  double range() const { return max() - min(); }

  //! FNV-1a over the bit patterns of the sorted values.
  std::uint64_t hash() const
  {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double v : *values_) {
      auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 0x100000001b3ull;
      }
    }
    return h;
  }

private:
  std::shared_ptr<const std::vector<double>> values_;
};

enum class EstimatorKind
{
  kde,
  jln_raw,
  jln_renorm,
  hg_raw,
  hg_renorm,
  hobskde_raw,
  hobskde_renorm
};

inline constexpr std::array<EstimatorKind, 7> all_kinds = {
  EstimatorKind::kde,         EstimatorKind::jln_raw,
  EstimatorKind::jln_renorm,  EstimatorKind::hg_raw,
  EstimatorKind::hg_renorm,   EstimatorKind::hobskde_raw,
  EstimatorKind::hobskde_renorm
};

//! The five estimators reported in the comparison table, in row order.
inline constexpr std::array<EstimatorKind, 5> table_kinds = {
  EstimatorKind::kde, EstimatorKind::jln_renorm, EstimatorKind::hg_raw,
  EstimatorKind::hobskde_raw, EstimatorKind::hobskde_renorm
};

inline std::string_view
kind_key(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::kde: return "kde";
    case EstimatorKind::jln_raw: return "jln_raw";
    case EstimatorKind::jln_renorm: return "jln_renorm";
    case EstimatorKind::hg_raw: return "hg_raw";
    case EstimatorKind::hg_renorm: return "hg_renorm";
    case EstimatorKind::hobskde_raw: return "hobskde_raw";
    case EstimatorKind::hobskde_renorm: return "hobskde_renorm";
  }
  return "?";
}

//! Row label in the markdown table.
inline std::string_view
kind_symbol(EstimatorKind kind)
{
  switch (kind) {
    case EstimatorKind::kde: return "f̂";
    case EstimatorKind::jln_raw: return "f̂_N";
    case EstimatorKind::jln_renorm: return "f̂_N^R";
    case EstimatorKind::hg_raw: return "f̂_S";
    case EstimatorKind::hg_renorm: return "f̂_S^R";
    case EstimatorKind::hobskde_raw: return "f̂_{S,N}";
    case EstimatorKind::hobskde_renorm: return "f̂_{S,N}^R";
  }
  return "?";
}

inline std::optional<EstimatorKind>
kind_from_key(std::string_view key)
{
  for (auto k : all_kinds)
    if (detail::iequals(key, kind_key(k)))
      return k;
  return std::nullopt;
}

inline bool
is_renormalised(EstimatorKind kind)
{
  return kind == EstimatorKind::jln_renorm || kind == EstimatorKind::hg_renorm ||
         kind == EstimatorKind::hobskde_renorm;
}

inline bool
needs_parametric_fit(EstimatorKind kind)
{
  return kind == EstimatorKind::hg_raw || kind == EstimatorKind::hg_renorm ||
         kind == EstimatorKind::hobskde_raw ||
         kind == EstimatorKind::hobskde_renorm;
}

struct EstimatorSpec
{
  EstimatorKind kind;
  Bandwidth h;
};

//! Tabulated density estimate.
using DensityEstimate = TabulatedFunction;

//! Normal MLE: sample mean and the divisor-n standard deviation.
inline ParametricFit
fit_normal_mle(const Sample& s)
{
  if (s.size() < 2)
    throw DegenerateFitError("normal fit needs at least two observations");
  if (s.min() == s.max())
    throw DegenerateFitError("normal fit of a zero-variance sample");
  const auto v = s.values();
  const double n = static_cast<double>(v.size());
  const double mu = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v)
    ss += (x - mu) * (x - mu);
  return ParametricFit(mu, std::sqrt(ss / n));
}

namespace detail {

//! x -> sum_i w_i K_h(x - X_i) over sorted X, skipping terms beyond the
//! kernel cutoff.
class KernelSum
{
public:
  KernelSum(Sample sample, std::vector<double> weights, Bandwidth h)
    : sample_(std::move(sample))
    , weights_(std::move(weights))
    , h_(h.value())
    , scale_(inv_sqrt_2pi / h.value())
    , exponent_(-0.5 / (h.value() * h.value()))
  {}

  double operator()(double x) const
  {
    const auto xs = sample_.values();
    const double reach = Kernel::cutoff * h_;
    const auto first = std::lower_bound(xs.begin(), xs.end(), x - reach) - xs.begin();
    const auto last = std::upper_bound(xs.begin() + first, xs.end(), x + reach) - xs.begin();
    double sum = 0.0;
    for (auto i = first; i < last; ++i) {
      const double d = x - xs[i];
      sum += weights_[i] * std::exp(exponent_ * d * d);
    }
    return scale_ * sum;
  }

  const Sample& sample() const { return sample_; }
  std::span<const double> weights() const { return weights_; }

private:
  Sample sample_;
  std::vector<double> weights_;
  double h_;
  double scale_;
  double exponent_;
};

inline std::vector<double>
uniform_weights(const Sample& s)
{
  return std::vector<double>(s.size(), 1.0 / static_cast<double>(s.size()));
}

} // namespace detail

//! g(x) * sum_i K_h(x - X_i) / (n g(X_i)) / D, with D = 1 for the raw form
//! and D = n^-1 sum_i (K_h * g)(X_i) / g(X_i) once renormalised.
class MultiplicativeEstimator
{
public:
  using Pilot = std::function<double(double)>;
  using PilotConvolution = std::function<double(double)>;

  //! Raw form. An empty pilot means g == 1.
  MultiplicativeEstimator(const Sample& s, Bandwidth h, Pilot pilot)
    : h_(h)
    , pilot_(std::move(pilot))
    , sum_(s, pilot_weights(s, pilot_), h)
  {}

  //! Renormalise using `conv(y) = (K_h * g)(y)`.
  void renormalise(const PilotConvolution& conv)
  {
    const auto xs = sum_.sample().values();
    const auto w = sum_.weights();
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
      d += w[i] * conv(xs[i]);
    if (!(d > 0.0) || !std::isfinite(d))
      throw RenormalisationError("renormalisation denominator is not positive");
    normaliser_ = d;
  }

  double operator()(double x) const
  {
    const double g = pilot_ ? pilot_(x) : 1.0;
    if (g == 0.0)
      return 0.0;
    return g * sum_(x) / normaliser_;
  }

  double pilot(double x) const { return pilot_ ? pilot_(x) : 1.0; }
  Bandwidth bandwidth() const { return h_; }
  const Sample& sample() const { return sum_.sample(); }
  //! Integral of the raw form; 1 for the renormalised form's numerator scale.
  double normaliser() const { return normaliser_; }

private:
  static std::vector<double> pilot_weights(const Sample& s, const Pilot& g)
  {
    const double n = static_cast<double>(s.size());
    std::vector<double> w(s.size());
    const auto xs = s.values();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double gi = g ? g(xs[i]) : 1.0;
      if (!std::isfinite(gi) || !(gi >= 1e-300))
        throw InvalidPilotError("pilot must be finite and >= 1e-300 at every sample point");
      w[i] = 1.0 / (n * gi);
    }
    return w;
  }

  Bandwidth h_;
  Pilot pilot_;
  detail::KernelSum sum_;
  double normaliser_ = 1.0;
};

//! Grid on which a pilot is tabulated for quadrature convolution at the
//! sample points: sample range padded by 11h, spacing h/4.
inline EvaluationGrid
pilot_tabulation_grid(const Sample& s, Bandwidth h, double feature)
{
  const double pad = (Kernel::cutoff + 1.0) * h.value();
  return EvaluationGrid::with_max_spacing(
    s.min() - pad, s.max() + pad, 0.25 * std::min(h.value(), feature));
}

//! (K_h * g) by quadrature of g tabulated on `pilot_tabulation_grid`.
//! `feature` is the narrowest length scale of g; the tabulation resolves
//! both it and h.
inline MultiplicativeEstimator::PilotConvolution
tabulated_pilot_convolution(const Sample& s,
                            Bandwidth h,
                            const MultiplicativeEstimator::Pilot& g,
                            double feature = std::numeric_limits<double>::infinity())
{
  auto table = std::make_shared<const TabulatedFunction>(
    TabulatedFunction::from(pilot_tabulation_grid(s, h, feature), g));
  return [table, h](double y) {
    return convolve_kernel_with_function(h, *table, y).value;
  };
}

//! Basic kernel estimator n^-1 sum K_h(x - X_i).
inline double
kde(const Sample& s, Bandwidth h, double x)
{
  return detail::KernelSum(s, detail::uniform_weights(s), h)(x);
}

template<class G>
double
multiplicative_raw(const Sample& s, Bandwidth h, G&& g, double x)
{
  return MultiplicativeEstimator(s, h, std::forward<G>(g))(x);
}

template<class G, class C>
double
multiplicative_renorm(const Sample& s, Bandwidth h, G&& g, C&& conv_g, double x)
{
  MultiplicativeEstimator est(s, h, std::forward<G>(g));
  est.renormalise(std::forward<C>(conv_g));
  return est(x);
}

//! Builds any of the seven estimators for a sample; the result evaluates
//! at arbitrary points.
inline MultiplicativeEstimator
make_estimator(const EstimatorSpec& spec, const Sample& s)
{
  const Bandwidth h = spec.h;
  switch (spec.kind) {
    case EstimatorKind::kde:
      return MultiplicativeEstimator(s, h, {});

    case EstimatorKind::jln_raw:
    case EstimatorKind::jln_renorm: {
      auto pilot = std::make_shared<const detail::KernelSum>(s, detail::uniform_weights(s), h);
      MultiplicativeEstimator::Pilot g = [pilot](double x) { return (*pilot)(x); };
      MultiplicativeEstimator est(s, h, g);
      if (spec.kind == EstimatorKind::jln_renorm)
        est.renormalise(tabulated_pilot_convolution(s, h, g));
      return est;
    }

    case EstimatorKind::hg_raw:
    case EstimatorKind::hg_renorm: {
      const ParametricFit fit = fit_normal_mle(s);
      MultiplicativeEstimator est(s, h, fit);
      if (spec.kind == EstimatorKind::hg_renorm)
        est.renormalise([fit, h](double y) {
          return convolve_kernel_with_normal(h, fit.mu(), fit.sigma(), y);
        });
      return est;
    }

    case EstimatorKind::hobskde_raw:
    case EstimatorKind::hobskde_renorm: {
      auto inner = std::make_shared<const MultiplicativeEstimator>(
        make_estimator({ EstimatorKind::hg_raw, h }, s));
      MultiplicativeEstimator::Pilot g = [inner](double x) { return (*inner)(x); };
      MultiplicativeEstimator est(s, h, g);
      if (spec.kind == EstimatorKind::hobskde_renorm) {
        // the raw HG pilot is a sum of normal x kernel products, each of
        // width sigma h / sqrt(sigma^2 + h^2)
        const double sd = fit_normal_mle(s).sigma();
        const double hv = h.value();
        est.renormalise(
          tabulated_pilot_convolution(s, h, g, sd * hv / std::hypot(sd, hv)));
      }
      return est;
    }
  }
  throw DomainError("unknown estimator kind");
}

inline DensityEstimate
tabulate(const MultiplicativeEstimator& est, const EvaluationGrid& grid)
{
  return TabulatedFunction::from(grid, [&](double x) { return est(x); });
}

//! Tabulates the estimator on `grid`, which must reach 6h beyond the data.
inline DensityEstimate
estimate(const EstimatorSpec& spec, const Sample& s, const EvaluationGrid& grid)
{
  const double margin = 6.0 * spec.h.value();
  if (!grid.covers(s.min() - margin, s.max() + margin))
    throw InsufficientSupportError(
      "evaluation grid must extend 6h beyond the sample range");
  return tabulate(make_estimator(spec, s), grid);
}

} // namespace mbkde
