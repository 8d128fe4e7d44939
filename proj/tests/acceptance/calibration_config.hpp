#pragma once

// The desk configuration shared by the calibration run and the acceptance
// suite.

#include <cstdint>

#include "pinembed/embedding.hpp"

namespace calibration {

inline constexpr std::uint64_t kN = 1'000'000'000;
inline constexpr std::uint64_t kThetaSeed = 20'240'601;
inline constexpr std::size_t kThetaCount = 500;
inline constexpr std::size_t kDeltaThetaCount = 16;
inline constexpr int kGrid = 1000;
inline constexpr int kResolution = 20'000;

inline pinembed::EmbeddingSpec spec(double sigma, std::uint64_t N) {
  pinembed::PlanOverrides o;
  o.n = 3;
  o.N = N;
  o.sigma = sigma;
  o.radius = 4.0 * sigma;
  return pinembed::plan_parameters(0.1, 1.0, pinembed::Mode::desk, o);
}

}  // namespace calibration
