#include "pinembed/spherical_dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "pinembed/error.hpp"

namespace pinembed {
namespace {

// Double evaluation throughout; promotion to long double costs about 8x.
using BetaPolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;

constexpr double kPi = std::numbers::pi;
constexpr int kMaxInverseSteps = 200;

void require_dimension(int n) {
  if (n < 1) throw DomainError("dimension must be >= 1, got " + std::to_string(n));
}

}  // namespace

double std_normal_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double std_normal_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi);
}

double lambda_n(int n) {
  require_dimension(n);
  if (n == 1) return 0.0;
  const double nd = n;
  const double log_lambda = std::log(nd - 1.0) + std::lgamma(1.0 + nd / 2.0) -
                            1.5 * std::log(nd) - 0.5 * std::log(kPi) -
                            std::lgamma(0.5 + nd / 2.0);
  return std::exp(log_lambda);
}

BallVolume ball_volume(int n) {
  require_dimension(n);
  const double nd = n;
  const double log_volume = 0.5 * nd * std::log(kPi) - std::lgamma(1.0 + nd / 2.0);
  const double log_omega =
      std::log(nd / (2.0 * kPi * std::numbers::e)) + (2.0 / nd) * log_volume;
  return {std::exp(log_volume), std::exp(log_omega)};
}

SphericalMarginal::SphericalMarginal(int n, double quad_tolerance)
    : n_(n), sqrt_n_(0.0), lambda_(0.0), quad_tolerance_(quad_tolerance) {
  require_dimension(n);
  if (!(quad_tolerance > 0.0)) throw DomainError("quad_tolerance must be positive");
  sqrt_n_ = std::sqrt(static_cast<double>(n));
  lambda_ = lambda_n(n);
}

Density SphericalMarginal::phi(double t) const {
  const double a = std::abs(t);
  if (a > sqrt_n_) return {0.0, false};
  if (a == sqrt_n_) {
    if (n_ <= 2) return {0.0, true};
    return {n_ == 3 ? lambda_ : 0.0, false};
  }
  if (n_ == 1) return {0.0, false};
  // 1 - t^2/n without cancellation near the support edge.
  const double base = (sqrt_n_ - a) * (sqrt_n_ + a) / n_;
  return {lambda_ * std::pow(base, 0.5 * (n_ - 3)), false};
}

double SphericalMarginal::upper_tail(double t) const {
  if (std::isnan(t)) return t;
  if (n_ == 1) return t < -1.0 ? 1.0 : (t < 1.0 ? 0.5 : 0.0);
  if (t >= sqrt_n_) return 0.0;
  if (t <= -sqrt_n_) return 1.0;
  if (n_ == 3) return (sqrt_n_ - t) / (2.0 * sqrt_n_);
  if (t < 0.0) return 1.0 - upper_tail(-t);

  const double b = 0.5 * (n_ - 1);
  const double x = t * t / n_;
  if (x < 0.5) return 0.5 * boost::math::ibetac(0.5, b, x, BetaPolicy());
  const double y = (sqrt_n_ - t) * (sqrt_n_ + t) / n_;
  return 0.5 * boost::math::ibeta(b, 0.5, y, BetaPolicy());
}

double SphericalMarginal::Phi(double t) const {
  if (std::isnan(t)) return t;
  if (t <= -sqrt_n_) return n_ == 1 && t == -1.0 ? 0.5 : 0.0;
  if (t >= sqrt_n_) return 1.0;
  if (n_ == 1) return 0.5;
  if (n_ == 3) return std::clamp((t + sqrt_n_) / (2.0 * sqrt_n_), 0.0, 1.0);
  const double p = t >= 0.0 ? 1.0 - upper_tail(t) : upper_tail(-t);
  return std::clamp(p, 0.0, 1.0);
}

// Walk to the pair of adjacent doubles bracketing q and return the closer one.
double SphericalMarginal::polish_upper_tail_inverse(double q, double t) const {
  constexpr int kMaxUlpSteps = 64;
  for (int i = 0; i < kMaxUlpSteps && t > 0.0 && upper_tail(t) < q; ++i) t = std::nextafter(t, 0.0);
  for (int i = 0; i < kMaxUlpSteps; ++i) {
    const double up = std::nextafter(t, sqrt_n_);
    if (up >= sqrt_n_ || upper_tail(up) < q) break;
    t = up;
  }
  const double up = std::nextafter(t, sqrt_n_);
  if (up < sqrt_n_ && std::abs(upper_tail(up) - q) < std::abs(upper_tail(t) - q)) return up;
  return t;
}

double SphericalMarginal::upper_tail_inverse(double q, double hint) const {
  const double b = 0.5 * (n_ - 1);
  double lo = 0.0;
  double hi = sqrt_n_;
  double t = hint;
  if (!(t > lo && t < hi)) {
    const double x = boost::math::ibetac_inv(0.5, b, std::min(1.0, 2.0 * q), BetaPolicy());
    t = std::sqrt(n_ * x);
  }
  for (int step = 0; step < kMaxInverseSteps; ++step) {
    const double residual = upper_tail(t) - q;
    if (residual == 0.0) return polish_upper_tail_inverse(q, t);
    // upper_tail is decreasing: a positive residual means t is too small.
    if (residual > 0.0) lo = std::max(lo, t);
    else hi = std::min(hi, t);

    const double density = phi(t).value;
    double next = density > 0.0 ? t + residual / density : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(t, 1e-300) ||
        hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi) {
      return polish_upper_tail_inverse(q, next);
    }
    t = next;
  }
  return polish_upper_tail_inverse(q, t);
}

double SphericalMarginal::Phi_inv(double s) const {
  if (!(s > 0.0 && s < 1.0)) {
    throw DomainError("quantile argument must lie in (0,1), got " + std::to_string(s));
  }
  if (n_ == 1) return s <= 0.5 ? -1.0 : 1.0;
  if (n_ == 3) return 2.0 * sqrt_n_ * s - sqrt_n_;
  if (s == 0.5) return 0.0;
  // Solve on the upper half and mirror, so Phi_inv(1-s) = -Phi_inv(s) exactly.
  if (s > 0.5) return upper_tail_inverse(1.0 - s, -1.0);
  return -upper_tail_inverse(s, -1.0);
}

double SphericalMarginal::psi(double s) const {
  const Density d = phi(Phi_inv(s));
  return d.unbounded ? std::numeric_limits<double>::infinity() : d.value;
}

TailSandwich SphericalMarginal::tail_sandwich(double t) const {
  if (n_ < 5) throw DomainError("tail sandwich requires n >= 5");
  const double threshold = std::sqrt(static_cast<double>(n_) / (n_ - 4));
  if (!(t >= threshold)) {
    throw DomainError("tail sandwich requires t >= sqrt(n/(n-4)) = " + std::to_string(threshold));
  }
  if (t >= sqrt_n_) return {0.0, 0.0};
  const double one_minus = (sqrt_n_ - t) * (sqrt_n_ + t) / n_;
  const double lower = n_ / (2.0 * (n_ - 3) * t) * one_minus * phi(t).value;
  return {lower, 2.0 * lower};
}

}  // namespace pinembed
