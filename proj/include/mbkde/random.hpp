#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

namespace mbkde {

//! SplitMix64 finaliser; used to derive independent seeds from counters.
constexpr std::uint64_t
splitmix64(std::uint64_t z)
{
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

//! Deterministic random stream.
//!
//! The engine is `std::mt19937_64`, whose output sequence is fixed by the
//! standard. Uniforms take the top 53 bits of one engine draw; normal
//! variates use the basic Box-Muller transform and hand out both values
//! of each pair, cosine branch first. None of this depends on the
//! standard library's distribution classes, so streams are reproducible
//! across toolchains.
class RandomStream
{
public:
  explicit RandomStream(std::uint64_t seed)
    : engine_(seed)
  {}

  //! Stream number `index` split off a master seed.
  static RandomStream split(std::uint64_t master_seed, std::uint64_t index)
  {
    return RandomStream(splitmix64(splitmix64(master_seed) ^ splitmix64(index)));
  }

  //! Uniform on [0, 1).
  double uniform()
  {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double standard_normal()
  {
    if (spare_) {
      const double z = *spare_;
      spare_.reset();
      return z;
    }
    const double u1 = 1.0 - uniform(); // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    return radius * std::cos(angle);
  }

  double normal(double mean, double sd) { return mean + sd * standard_normal(); }

private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

} // namespace mbkde
