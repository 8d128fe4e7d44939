#pragma once

// Counter-based generator used for every seeded draw in the project.
//
// Output k of a stream with seed s is SplitMix64's finalizer applied to the
// counter value s + (k + 1) * 0x9E3779B97F4A7C15:
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31)
// Uniforms use the top 53 bits. Normals use the Box-Muller transform on a
// pair (u1 in (0,1], u2 in [0,1)):
//   r = sqrt(-2 ln u1),  z0 = r cos(2 pi u2),  z1 = r sin(2 pi u2)
// consumed in the order z0, z1.

#include <cstdint>

namespace pinembed {

class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

  /// Output at an absolute counter position, independent of stream state.
  static std::uint64_t at(std::uint64_t seed, std::uint64_t counter);

  std::uint64_t next() { return at(seed_, counter_++); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low();
  /// Standard normal.
  double normal();

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pinembed
