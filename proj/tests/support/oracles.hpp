#pragma once

// Independent reference implementations used only by tests. Nothing here
// calls into the routines it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace pinembed::oracle {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_order.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int order) : nodes(order), weights(order) {
    for (int i = 0; i < order; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
inline double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64) {
  static const GaussLegendre gl(20);
  const double h = (b - a) / panels;
  long double total = 0.0L;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double mid = lo + 0.5 * h;
    long double panel = 0.0L;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) panel += gl.weights[i] * f(mid + 0.5 * h * gl.nodes[i]);
    total += panel * 0.5L * h;
  }
  return static_cast<double>(total);
}

// Spherical marginal CDF through t = sqrt(n) sin(u): the density
// becomes proportional to cos(u)^(n-2), smooth for every n >= 2.
inline double marginal_cdf(int n, double t) {
  const double r = std::sqrt(static_cast<double>(n));
  if (t <= -r) return 0.0;
  if (t >= r) return 1.0;
  auto g = [n](double u) { return std::pow(std::cos(u), n - 2); };
  const double half = std::numbers::pi / 2.0;
  const double total = integrate(g, -half, half, 256);
  const double upper = std::asin(t / r);
  // Integrate the shorter side for accuracy in the tails.
  if (upper > 0.0) return 1.0 - integrate(g, upper, half, 256) / total;
  return integrate(g, -half, upper, 256) / total;
}

inline double marginal_upper_tail(int n, double t) {
  const double r = std::sqrt(static_cast<double>(n));
  if (t >= r) return 0.0;
  auto g = [n](double u) { return std::pow(std::cos(u), n - 2); };
  const double half = std::numbers::pi / 2.0;
  return integrate(g, std::asin(t / r), half, 256) / integrate(g, -half, half, 256);
}

// Normalizer of (1 - t^2/n)^((n-3)/2) by direct quadrature, n >= 3.
inline double lambda_by_quadrature(int n) {
  const double r = std::sqrt(static_cast<double>(n));
  auto g = [n](double u) { return std::pow(std::cos(u), n - 2); };
  const double half = std::numbers::pi / 2.0;
  return 1.0 / (r * integrate(g, -half, half, 256));
}

// P{|X| > t} for standard Gaussian X in R^n, by quadrature of the radial
// density n vol(B) (2 pi)^(-n/2) x^(n-1) exp(-x^2/2).
inline double gaussian_norm_tail(int n, double t) {
  const double vol = std::pow(std::numbers::pi, n / 2.0) / std::tgamma(1.0 + n / 2.0);
  const double c = n * vol * std::pow(2.0 * std::numbers::pi, -n / 2.0);
  auto f = [n, t](double x) { return std::exp((n - 1) * std::log(x) - 0.5 * (x * x - t * t)); };
  return c * std::exp(-0.5 * t * t) * integrate(f, t, t + 40.0, 400);
}

// All points of Z^n in the radius-r ball, by scanning the bounding cube.
inline std::vector<std::vector<int>> grid_scan_ball(int n, double r) {
  const int bound = static_cast<int>(std::ceil(r)) + 1;
  std::vector<std::vector<int>> out;
  std::vector<int> x(n, -bound);
  const double limit = r * r * (1.0 + 1e-12);
  while (true) {
    long sumsq = 0;
    for (int v : x) sumsq += static_cast<long>(v) * v;
    if (sumsq <= limit) out.push_back(x);
    int j = n - 1;
    while (j >= 0 && x[j] == bound) x[j--] = -bound;
    if (j < 0) break;
    ++x[j];
  }
  return out;
}

inline double lp_expanded(const std::vector<double>& v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  long double s = 0.0L;
  for (double x : v) s += std::pow(static_cast<long double>(std::abs(x)), static_cast<long double>(p));
  return static_cast<double>(std::pow(s, 1.0L / p));
}

inline double topk_expanded(std::vector<double> v, std::size_t k) {
  for (double& x : v) x = std::abs(x);
  std::sort(v.begin(), v.end(), std::greater<>());
  long double s = 0.0L;
  for (std::size_t i = 0; i < k; ++i) s += v[i];
  return static_cast<double>(s);
}

// Expanded order statistics: F^-1(s) = u_i for (i-1)/N < s <= i/N.
inline double quantile_expanded(std::vector<double> v, double s) {
  std::sort(v.begin(), v.end());
  const auto N = v.size();
  std::size_t i = 1;
  while (i < N && !(s <= static_cast<long double>(i) / N)) ++i;
  return v[i - 1];
}

inline double cdf_expanded(const std::vector<double>& v, double t) {
  std::size_t c = 0;
  for (double x : v) c += x <= t;
  return static_cast<double>(c) / static_cast<double>(v.size());
}

}  // namespace pinembed::oracle
