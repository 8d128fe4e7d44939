// Calibration run behind the frozen distortion and delta_eff values in
// acceptance.cpp. Prints the numbers; it does not assert anything.
//
//   1. Brute force: n=3, sigma=6, radius 24, N=1e5. Multiplicities are
//      recomputed from the cell formula in long double, T is expanded to all
//      N rows, and ||T theta||_2 is compared with the row-group pipeline.
//   2. Sweep: sigma in {3, 6, 12}, radius 4 sigma, N=1e9, l2, 500 directions
//      from sphere_sample(3, 500, kThetaSeed); spread and delta_eff.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "calibration_config.hpp"
#include "oracles.hpp"
#include "pinembed/embedding.hpp"
#include "pinembed/verify.hpp"

using namespace pinembed;

namespace {

long double mass(int k, long double sigma) {
  const long double s = 1.0L / (sigma * std::sqrt(2.0L));
  return 0.5L * (std::erfc((k - 0.5L) * s) - std::erfc((k + 0.5L) * s));
}

double brute_force_check() {
  const auto spec = calibration::spec(6.0, 100000);
  const auto matrix = build_matrix(spec);

  // Independent multiplicities and dense rows.
  const auto points = oracle::grid_scan_ball(3, spec.radius());
  std::vector<unsigned long long> m(points.size());
  unsigned long long nprime = 0;
  std::size_t zero = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    long double p = 1.0L;
    for (int c : points[i]) p *= mass(c, spec.sigma);
    m[i] = static_cast<unsigned long long>(std::floor(static_cast<long double>(spec.N) * p));
    nprime += m[i];
    if (points[i] == std::vector<int>{0, 0, 0}) zero = i;
  }
  m[zero] += spec.N - nprime;
  std::vector<std::array<double, 3>> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = std::sqrt(static_cast<double>(points[i][0] * points[i][0] + points[i][1] * points[i][1] +
                                                   points[i][2] * points[i][2]));
    std::array<double, 3> d{0, 0, 0};
    if (r > 0) {
      for (int j = 0; j < 3; ++j) d[j] = std::sqrt(3.0) * points[i][j] / r;
    }
    rows.insert(rows.end(), m[i], d);
  }

  std::size_t mismatched = 0;
  for (std::size_t g = 0; g < matrix.group_count(); ++g) mismatched += matrix.multiplicity(g) != m[g];
  std::printf("brute: groups=%zu dense_rows=%zu multiplicity_mismatches=%zu\n", matrix.group_count(), rows.size(),
              mismatched);

  double worst = 0.0;
  const auto norm = PermInvariantNorm::lp(2);
  for (const auto& theta : sphere_sample(3, 50, calibration::kThetaSeed)) {
    long double sq = 0.0L;
    for (const auto& r : rows) {
      const long double v = static_cast<long double>(r[0]) * theta[0] + static_cast<long double>(r[1]) * theta[1] +
                            static_cast<long double>(r[2]) * theta[2];
      sq += v * v;
    }
    const double dense = static_cast<double>(std::sqrt(sq));
    const double grouped = norm.eval(pinembed::apply(matrix, theta));
    worst = std::max(worst, std::abs(dense - grouped) / dense);
  }
  std::printf("brute: max relative |Ttheta|_2 difference over 50 directions = %.3e\n", worst);
  return worst;
}

}  // namespace

int main() {
  brute_force_check();
  const auto thetas = sphere_sample(3, calibration::kThetaCount, calibration::kThetaSeed);
  for (double sigma : {3.0, 6.0, 12.0}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto spec = calibration::spec(sigma, calibration::kN);
    const auto matrix = build_matrix(spec);
    const auto profile = reference_profile(spec, calibration::kResolution);
    const auto norm = PermInvariantNorm::lp(2);
    const double M = scaling_constant(profile, norm);
    const auto report = distortion_sweep(matrix, norm, thetas, M);
    double worst_delta = 0.0;
    const auto delta_thetas = sphere_sample(3, calibration::kDeltaThetaCount, calibration::kThetaSeed);
    for (const auto& theta : delta_thetas) {
      worst_delta = std::max(worst_delta, effective_delta(project(matrix, theta), 3, calibration::kGrid));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf(
        "sigma=%g groups=%zu M=%.17g bucket_width=%.3e min=%.17g max=%.17g spread=%.17g delta_eff=%.17g (%.1fs)\n",
        sigma, matrix.group_count(), M, profile.bucket_width_bound, report.min_ratio, report.max_ratio,
        report.distortion, worst_delta, secs);
  }
}
