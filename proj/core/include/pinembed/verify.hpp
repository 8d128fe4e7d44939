#pragma once

// Measuring how close the row cloud of T is to the uniform law on the
// sphere: projected quantiles against Phi_n with the allowed bands, and
// norm-ratio sweeps over directions.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pinembed/embedding.hpp"
#include "pinembed/norms.hpp"

namespace pinembed {

/// The law of <theta, row> under the row multiplicities, sorted and merged.
struct EmpiricalProjection {
  std::vector<double> theta;
  WeightedMultiset values;
  /// Running totals of counts, aligned with values.items().
  std::vector<std::uint64_t> cumulative;
  /// Set when |theta| differed from 1 by more than 1e-9 and was normalized.
  bool renormalized = false;

  std::uint64_t total() const noexcept { return values.total(); }
};

EmpiricalProjection project(const RowGroupMatrix& matrix, std::span<const double> theta);

/// F(t) = #{rows with value <= t} / N, rounded toward zero.
double empirical_cdf(const EmpiricalProjection& proj, double t);

/// inf{t : F(t) >= s} for s in (0, 1]; the i-th order statistic for
/// (i-1)/N < s <= i/N, with s N compared exactly.
double empirical_quantile(const EmpiricalProjection& proj, double s);

enum class BandRegime { lower_tail, lower_scaled, middle, upper_scaled, upper_tail };

std::string to_string(BandRegime regime);

struct BandRow {
  double s;
  double empirical;  // F^-1(s)
  double reference;  // Phi_n^-1(s)
  double deviation;  // distance to the regime's target
  double band;
  BandRegime regime;
  bool pass;
  bool boundary;  // s sits on a regime boundary (a, 1-a, b or 1-b)
};

/// Quantile deviations on the grid s_j = (j - 1/2)/grid_size against
///   20 delta |Phi_n^-1(s)|      for s in [1-b, 1-a] and [a, b]
///   7 delta                     for s in (1-a, a)
///   29 delta sqrt(n)  around -+sqrt(n)  for s in (0, 1-b) and (b, 1)
/// with a = Phi_n(1.5), b = Phi_n((1 - 17 delta) sqrt(n)).
struct QuantileBandReport {
  int n = 0;
  double delta = 0.0;
  double a = 0.0;
  double b = 0.0;
  std::vector<BandRow> rows;
  bool pass = true;
  /// max over rows of deviation / band.
  double max_ratio = 0.0;
};

/// Throws DomainError for truncated matrices, whose rows no longer lie on
/// the sphere of radius sqrt(n).
QuantileBandReport quantile_band_report(const RowGroupMatrix& matrix, std::span<const double> theta,
                                        double delta, int grid_size);
QuantileBandReport quantile_band_report(const EmpiricalProjection& proj, int n, double delta,
                                        int grid_size);

/// Smallest delta in (0, 1/17) for which every grid point passes its band,
/// or +infinity if there is none. The regime of a grid point changes with
/// delta only through b, so the search runs over the finitely many
/// breakpoints where some constraint becomes tight.
double effective_delta(const EmpiricalProjection& proj, int n, int grid_size);

/// `count` points on S^{n-1} from normalized Gaussian vectors drawn with
/// CounterRng(seed). Same seed, same bytes.
std::vector<std::vector<double>> sphere_sample(int n, std::size_t count, std::uint64_t seed);

inline constexpr int kHistogramBins = 64;

struct DistortionReport {
  std::vector<double> ratios;  // ||T theta_i|| / M, in input order
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  /// max(max_ratio - 1, 1 - min_ratio)
  double distortion = 0.0;
  /// kHistogramBins equal bins over [min_ratio, max_ratio].
  std::vector<std::uint64_t> histogram;
  bool non_unit_input = false;
};

DistortionReport distortion_sweep(const RowGroupMatrix& matrix, const PermInvariantNorm& norm,
                                  std::span<const std::vector<double>> thetas, double M,
                                  unsigned threads = 1);

/// 6^{-1/4} ((x_i + x_j)_{i<j}, (x_i - x_j)_{i<j}); an isometry from l_2^4
/// into l_4^12 because 6 (sum x_i^2)^2 = sum (x_i+x_j)^4 + sum (x_i-x_j)^4.
std::array<double, 12> l4_reference_embedding(std::span<const double, 4> x);

}  // namespace pinembed
