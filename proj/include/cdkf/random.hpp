#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "cdkf/matrix.hpp"

namespace cdkf {

/// Standard normal draws from std::mt19937_64 through the Box-Muller transform.
///
/// Both pieces are fully specified (mt19937_64 by the standard, the transform here),
/// so a given seed produces the same stream on every conforming toolchain.
/// std::normal_distribution is avoided because its algorithm is implementation-defined.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double standard_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1).
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Column vector of `n` independent standard normals.
  Matrix standard_normal_vector(std::size_t n) {
    Matrix v(n, 1);
    for (std::size_t i = 0; i < n; ++i) v[i] = standard_normal();
    return v;
  }

  /// 53-bit uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cdkf
