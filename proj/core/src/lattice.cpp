#include "pinembed/lattice.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "parallel.hpp"
#include "pinembed/error.hpp"
#include "pinembed/spherical_dist.hpp"

namespace pinembed {

namespace {

using HighPrecision = boost::multiprecision::cpp_bin_float_50;

constexpr double kBoundaryRelTol = 1e-12;
constexpr double kTieRelTol = 1e-9;

std::int64_t isqrt(std::int64_t v) {
  if (v <= 0) return 0;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// Lexicographic depth-first walk; x[0..level) fixed, `remaining` is the
// squared-norm budget left for x[level..n).
void walk(int level, std::int64_t remaining, std::vector<Coord>& x, PointList& out) {
  const auto n = static_cast<int>(x.size());
  const std::int64_t bound = isqrt(remaining);
  for (std::int64_t v = -bound; v <= bound; ++v) {
    x[level] = static_cast<Coord>(v);
    if (level + 1 == n) {
      out.push_back(x);
    } else {
      walk(level + 1, remaining - v * v, x, out);
    }
  }
}

// Error-free transformations for double-double arithmetic.
struct DoubleDouble {
  double hi;
  double lo;
};

DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

DoubleDouble dd_mul(DoubleDouble x, double y) {
  DoubleDouble p = two_prod(x.hi, y);
  p.lo += x.lo * y;
  return two_sum(p.hi, p.lo);
}

DoubleDouble dd_add(DoubleDouble x, DoubleDouble y) {
  DoubleDouble s = two_sum(x.hi, y.hi);
  s.lo += x.lo + y.lo;
  return two_sum(s.hi, s.lo);
}

// Phi((k+1/2)/sigma) - Phi((k-1/2)/sigma) for k = |x_i|, written as a
// difference of upper tails so nothing cancels against 1.
double coordinate_mass(std::int64_t k, double sigma) {
  const double scale = 1.0 / (sigma * std::numbers::sqrt2);
  if (k == 0) return std::erf(0.5 * scale);
  const double kk = static_cast<double>(k);
  return 0.5 * (std::erfc((kk - 0.5) * scale) - std::erfc((kk + 0.5) * scale));
}

HighPrecision precise_coordinate_mass(std::int64_t k, double sigma) {
  const HighPrecision scale = 1 / (HighPrecision(sigma) * boost::multiprecision::sqrt(HighPrecision(2)));
  if (k == 0) return boost::math::erf(HighPrecision(0.5) * scale);
  const HighPrecision kk(static_cast<double>(k));
  return (boost::math::erfc((kk - HighPrecision(0.5)) * scale) - boost::math::erfc((kk + HighPrecision(0.5)) * scale)) / 2;
}

// Below this the double mass is subnormal or zero; the log comes from 50 digits.
constexpr double kLogFallbackMass = 1e-290;

double coordinate_log_mass(std::int64_t k, double sigma, double mass) {
  if (mass > kLogFallbackMass) return std::log(mass);
  return static_cast<double>(boost::multiprecision::log(precise_coordinate_mass(k, sigma)));
}

class CellFactors {
 public:
  CellFactors(double sigma, std::int64_t max_abs) : sigma_(sigma), mass_(max_abs + 1) {
    for (std::int64_t k = 0; k <= max_abs; ++k) mass_[k] = coordinate_mass(k, sigma);
  }

  double mass(Coord c) const { return mass_[static_cast<std::size_t>(std::abs(c))]; }

  const HighPrecision& precise_mass(Coord c) {
    const auto k = static_cast<std::size_t>(std::abs(c));
    if (precise_.size() < mass_.size()) precise_.resize(mass_.size());
    if (!precise_[k]) precise_[k] = precise_coordinate_mass(static_cast<std::int64_t>(k), sigma_);
    return *precise_[k];
  }

 private:
  double sigma_;
  std::vector<double> mass_;
  std::vector<std::optional<HighPrecision>> precise_;
};

struct FloorCandidate {
  std::uint64_t floor;
  bool tie;
};

FloorCandidate floor_of_product(std::uint64_t N, std::span<const Coord> x, const CellFactors& f) {
  DoubleDouble p{1.0, 0.0};
  for (Coord c : x) p = dd_mul(p, f.mass(c));
  if (p.hi <= 0.0) return {0, false};

  // N <= 2^63 - 1, so n_hi <= 2^63 converts back to uint64 exactly.
  const double n_hi = static_cast<double>(N);
  const double n_lo = static_cast<double>(static_cast<std::int64_t>(N - static_cast<std::uint64_t>(n_hi)));
  DoubleDouble np = dd_add(dd_mul(p, n_hi), dd_mul(p, n_lo));

  double fl = std::floor(np.hi);
  double frac = (np.hi - fl) + np.lo;
  if (frac < 0.0) {
    fl -= 1.0;
    frac += 1.0;
  } else if (frac >= 1.0) {
    fl += 1.0;
    frac -= 1.0;
  }
  const double distance = std::min(frac, 1.0 - frac);
  const bool tie = distance <= kTieRelTol * np.hi;
  return {fl <= 0.0 ? 0 : static_cast<std::uint64_t>(fl), tie};
}

std::uint64_t precise_floor(std::uint64_t N, std::span<const Coord> x, CellFactors& f) {
  HighPrecision p(1);
  for (Coord c : x) p *= f.precise_mass(c);
  const HighPrecision np = p * HighPrecision(N);
  return static_cast<std::uint64_t>(boost::multiprecision::floor(np));
}

}  // namespace

double estimate_ball_points(int n, double radius) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  if (!(radius >= 0.0)) throw DomainError("radius must be >= 0");
  const double r = radius + 0.5 * std::sqrt(static_cast<double>(n));
  return ball_volume(n).volume * std::pow(r, n);
}

PointList enumerate_ball(int n, double radius, const EnumerationOptions& options) {
  const double estimate = estimate_ball_points(n, radius);
  if (estimate > options.cap) {
    throw CapacityError("estimated lattice point count " + std::to_string(estimate) +
                            " exceeds cap " + std::to_string(options.cap),
                        estimate);
  }
  const double r2 = radius * radius * (1.0 + kBoundaryRelTol);
  const auto limit = static_cast<std::int64_t>(std::floor(r2));
  const std::int64_t first_bound = isqrt(limit);

  // Split on the leading coordinate; chunks are concatenated in order.
  const auto first_values = static_cast<std::size_t>(2 * first_bound + 1);
  std::vector<PointList> parts;
  const unsigned threads = detail::resolve_threads(options.threads);
  const unsigned chunks = static_cast<unsigned>(std::min<std::size_t>(threads, first_values));
  parts.assign(chunks, PointList(n));
  detail::parallel_chunks(first_values, chunks, [&](std::size_t begin, std::size_t end, unsigned c) {
    std::vector<Coord> x(n, 0);
    for (std::size_t i = begin; i < end; ++i) {
      const std::int64_t v = -first_bound + static_cast<std::int64_t>(i);
      x[0] = static_cast<Coord>(v);
      if (n == 1) {
        parts[c].push_back(x);
      } else {
        walk(1, limit - v * v, x, parts[c]);
      }
    }
  });

  PointList out(n);
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.reserve(total);
  for (const auto& p : parts) out.append(p);
  return out;
}

CellProbability cell_probability(std::span<const Coord> point, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  double log_p = 0.0;
  double p = 1.0;
  for (Coord c : point) {
    const std::int64_t k = std::abs(static_cast<std::int64_t>(c));
    const double m = coordinate_mass(k, sigma);
    log_p += coordinate_log_mass(k, sigma, m);
    p *= m;
  }
  return {log_p, p};
}

MultiplicityTable build_multiplicities(int n, std::uint64_t N, double sigma, double alpha,
                                       const EnumerationOptions& options) {
  if (N < 1) throw DomainError("N must be >= 1");
  if (N > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
    throw DomainError("N must be <= 2^63 - 1");
  }
  if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");

  MultiplicityTable table;
  table.N = N;
  table.sigma = sigma;
  table.alpha = alpha;
  table.radius = alpha * std::sqrt(static_cast<double>(n));
  table.points = enumerate_ball(n, table.radius, options);

  const std::size_t count = table.points.size();
  std::int64_t max_abs = 0;
  for (Coord c : table.points.raw()) max_abs = std::max<std::int64_t>(max_abs, std::abs(c));
  CellFactors factors(sigma, max_abs);

  table.m.assign(count, 0);
  std::vector<unsigned char> tie(count, 0);
  detail::parallel_chunks(count, options.threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      const FloorCandidate c = floor_of_product(N, table.points[i], factors);
      table.m[i] = c.floor;
      tie[i] = c.tie ? 1 : 0;
    }
  });
  for (std::size_t i = 0; i < count; ++i) {
    if (!tie[i]) continue;
    table.m[i] = precise_floor(N, table.points[i], factors);
    ++table.high_precision_floors;
  }

  std::uint64_t total = 0;
  bool overflow = false;
  bool found_zero = false;
  for (std::size_t i = 0; i < count; ++i) {
    overflow = overflow || __builtin_add_overflow(total, table.m[i], &total);
    auto x = table.points[i];
    if (!found_zero && std::all_of(x.begin(), x.end(), [](Coord c) { return c == 0; })) {
      table.zero_index = i;
      found_zero = true;
    }
  }
  if (!found_zero) throw InternalError("origin missing from lattice ball");
  if (overflow || total > N) {
    throw InternalError("sum of floors N' exceeds N; cell masses are inconsistent");
  }
  table.N_prime = total;
  table.m_prime = table.m;
  table.m_prime[table.zero_index] += N - table.N_prime;
  return table;
}

}  // namespace pinembed
