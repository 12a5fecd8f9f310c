#pragma once

#include <cstdint>
#include <random>

#include "svx/types.hpp"

namespace svx {

/**
 * \brief Deterministic random stream with platform-independent doubles.
 *
 * std::uniform_real_distribution is implementation-defined, so reports that
 * must be byte-stable derive doubles straight from mt19937_64 words.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 mantissa bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform point on the annulus radius * [1-jitter, 1+jitter].
  Cplx on_circle(double radius, double jitter = 0.0) {
    const double r = radius * (1.0 + jitter * (2.0 * uniform() - 1.0));
    const double th = uniform(0.0, 6.283185307179586476925287);
    return std::polar(r, th);
  }

  std::uint64_t word() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace svx
