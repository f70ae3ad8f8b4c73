#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace optrec {

/// Seeded generator with platform-independent variates.
///
/// std::uniform_real_distribution is implementation-defined, so the bit
/// patterns of mt19937_64 are mapped to doubles here directly. Every random
/// quantity in the library is derived from one of these.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream `stream` of seed `seed`; distinct streams are decorrelated.
  Rng(std::uint64_t seed, std::uint64_t stream)
      : engine_(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on the closed unit disc, by rejection from the square.
  std::complex<double> unit_disc() {
    for (;;) {
      const double x = uniform(-1.0, 1.0);
      const double y = uniform(-1.0, 1.0);
      if (x * x + y * y <= 1.0) return {x, y};
    }
  }

  /// Standard normal via Box-Muller.
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  std::complex<double> complex_normal() { return {normal(), normal()}; }

  /// Uniform integer in [lo, hi].
  std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t span = hi - lo + 1;
    return lo + static_cast<std::uint64_t>(uniform() * static_cast<double>(span)) % span;
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;
  std::mt19937_64 engine_;
};

}  // namespace optrec
