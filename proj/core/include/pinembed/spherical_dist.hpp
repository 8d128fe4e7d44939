#pragma once

// Marginal law of one coordinate of a uniform point on the sphere of radius
// sqrt(n) in R^n, together with the standard normal law it converges to.

#include <utility>

namespace pinembed {

/// Standard normal CDF, absolute error below 1e-15.
double std_normal_cdf(double t);

/// Standard normal density.
double std_normal_pdf(double t);

/// Normalizing constant of the spherical marginal density,
/// (n-1) Gamma(1+n/2) / (n^{3/2} sqrt(pi) Gamma(1/2+n/2)).
/// Zero for n = 1, where the marginal is the two-point law on {-1, +1}.
double lambda_n(int n);

struct BallVolume {
  double volume;   ///< vol_n(B_2^n)
  double omega_n;  ///< vol = (2 pi e omega_n / n)^{n/2}
};

/// Volume of the Euclidean unit ball, evaluated through log-Gamma.
BallVolume ball_volume(int n);

/// Density value; `unbounded` is set where the density has a pole
/// (|t| = sqrt(n) for n <= 2), in which case `value` is meaningless.
struct Density {
  double value = 0.0;
  bool unbounded = false;
};

struct TailSandwich {
  double lower;
  double upper;
};

/// Evaluators for the spherical marginal at a fixed dimension. Immutable and
/// safe to share between threads.
///
/// The CDF uses the incomplete-beta reduction
///   1 - Phi_n(t) = I_{1 - t^2/n}((n-1)/2, 1/2) / 2,   t >= 0,
/// switching to the complementary form near the center so that both the bulk
/// and the tails are computed without cancellation. n = 3 uses the exact
/// uniform law.
class SphericalMarginal {
 public:
  static constexpr double kDefaultQuadTolerance = 1e-12;

  explicit SphericalMarginal(int n, double quad_tolerance = kDefaultQuadTolerance);

  int n() const noexcept { return n_; }
  double lambda() const noexcept { return lambda_; }
  double quad_tolerance() const noexcept { return quad_tolerance_; }
  double support_edge() const noexcept { return sqrt_n_; }

  Density phi(double t) const;
  double Phi(double t) const;
  /// 1 - Phi(t), accurate in the upper tail.
  double upper_tail(double t) const;

  /// Quantile function on (0,1). Throws DomainError outside.
  double Phi_inv(double s) const;

  /// phi(Phi_inv(s)), concave on (0,1) for n >= 3.
  double psi(double s) const;

  /// Bounds on 1 - Phi(t) for n >= 5 and t >= sqrt(n/(n-4)).
  TailSandwich tail_sandwich(double t) const;

 private:
  // Solves upper_tail(t) = q for t in [0, sqrt n], q in (0, 1/2].
  double upper_tail_inverse(double q, double hint) const;
  double polish_upper_tail_inverse(double q, double t) const;

  int n_;
  double sqrt_n_;
  double lambda_;
  double quad_tolerance_;
};

}  // namespace pinembed
