#pragma once

#include <cstdint>
#include <random>

namespace elmbif {

/// Portable uniform source. std::mt19937_64 is bit-specified by the standard;
/// the real-valued distributions are not, so the mapping to [0,1) is done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// a + (b - a) * U[0,1); reversed bounds sample the same segment.
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace elmbif
