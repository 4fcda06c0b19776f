#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "halos/surface.hpp"

namespace halos {

// Deterministic draws across platforms: mt19937_64 is fully specified by the
// standard, the distributions are not, so values are derived from raw 64-bit
// words only.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on the closed disc of the given radius.
  Complex disc(double radius) {
    const double r = radius * std::sqrt(uniform());
    const double t = 2.0 * M_PI * uniform();
    return Complex(r * std::cos(t), r * std::sin(t));
  }

  // Standard complex gaussian via Box-Muller on the deterministic uniforms.
  Complex gaussian() {
    double u = uniform();
    while (u == 0.0) u = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double t = 2.0 * M_PI * uniform();
    return Complex(r * std::cos(t), r * std::sin(t)) / std::sqrt(2.0);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace halos
