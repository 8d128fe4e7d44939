#include "pinembed/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "parallel.hpp"
#include "pinembed/error.hpp"
#include "pinembed/random.hpp"
#include "pinembed/spherical_dist.hpp"

namespace pinembed {

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kBoundaryTolerance = 1e-12;
constexpr double kMaxDelta = 1.0 / 17.0;

double euclidean_norm(std::span<const double> x) {
  long double sum = 0.0L;
  for (double v : x) sum += static_cast<long double>(v) * v;
  return static_cast<double>(std::sqrt(sum));
}

struct Thresholds {
  double tail_a;  // 1 - a
  double a;
  double tail_b;  // 1 - b
  double b;
};

Thresholds thresholds(const SphericalMarginal& marginal, double delta) {
  const double tail_a = marginal.upper_tail(1.5);
  const double tail_b = marginal.upper_tail((1.0 - 17.0 * delta) * marginal.support_edge());
  return {tail_a, 1.0 - tail_a, tail_b, 1.0 - tail_b};
}

BandRegime classify(double s, const Thresholds& th) {
  if (s > th.tail_a && s < th.a) return BandRegime::middle;
  if (s < th.tail_b) return BandRegime::lower_tail;
  if (s > th.b) return BandRegime::upper_tail;
  return s < 0.5 ? BandRegime::lower_scaled : BandRegime::upper_scaled;
}

// Per-grid-point quantities that do not depend on delta.
struct GridPoint {
  double s;
  double empirical;
  double reference;
  double dev_reference;  // |F^-1(s) - Phi_n^-1(s)|
  double dev_edge;       // |F^-1(s) -+ sqrt(n)|, sign by side of 1/2
};

std::vector<GridPoint> grid_points(const EmpiricalProjection& proj, const SphericalMarginal& marginal,
                                   int grid_size) {
  if (grid_size < 1) throw DomainError("grid_size must be >= 1");
  std::vector<GridPoint> points;
  points.reserve(grid_size);
  const double edge = marginal.support_edge();
  for (int j = 1; j <= grid_size; ++j) {
    const double s = (j - 0.5) / grid_size;
    const double empirical = empirical_quantile(proj, s);
    const double reference = marginal.Phi_inv(s);
    const double target_edge = s < 0.5 ? -edge : edge;
    points.push_back({s, empirical, reference, std::abs(empirical - reference),
                      std::abs(empirical - target_edge)});
  }
  return points;
}

struct Evaluated {
  double deviation;
  double band;
  BandRegime regime;
};

Evaluated evaluate(const GridPoint& p, const Thresholds& th, double delta, double sqrt_n) {
  const BandRegime regime = classify(p.s, th);
  switch (regime) {
    case BandRegime::middle:
      return {p.dev_reference, 7.0 * delta, regime};
    case BandRegime::lower_tail:
    case BandRegime::upper_tail:
      return {p.dev_edge, 29.0 * delta * sqrt_n, regime};
    default:
      return {p.dev_reference, 20.0 * delta * std::abs(p.reference), regime};
  }
}

bool all_pass(const std::vector<GridPoint>& points, const SphericalMarginal& marginal, double delta) {
  const Thresholds th = thresholds(marginal, delta);
  const double sqrt_n = marginal.support_edge();
  return std::all_of(points.begin(), points.end(), [&](const GridPoint& p) {
    const Evaluated e = evaluate(p, th, delta, sqrt_n);
    return e.deviation <= e.band;
  });
}

bool near(double x, double y) { return std::abs(x - y) <= kBoundaryTolerance; }

}  // namespace

std::string to_string(BandRegime regime) {
  switch (regime) {
    case BandRegime::lower_tail: return "lower_tail";
    case BandRegime::lower_scaled: return "lower_scaled";
    case BandRegime::middle: return "middle";
    case BandRegime::upper_scaled: return "upper_scaled";
    case BandRegime::upper_tail: return "upper_tail";
  }
  return "unknown";
}

EmpiricalProjection project(const RowGroupMatrix& matrix, std::span<const double> theta) {
  if (theta.size() != static_cast<std::size_t>(matrix.columns())) {
    throw DomainError("project: theta has length " + std::to_string(theta.size()) + ", expected " +
                      std::to_string(matrix.columns()));
  }
  EmpiricalProjection proj;
  proj.theta.assign(theta.begin(), theta.end());
  const double norm = euclidean_norm(theta);
  if (!(norm > 0.0)) throw DomainError("project: theta must be non-zero");
  if (std::abs(norm - 1.0) > kUnitTolerance) {
    for (double& v : proj.theta) v /= norm;
    proj.renormalized = true;
  }
  proj.values = pinembed::apply(matrix, proj.theta);
  proj.values.sort_and_merge();
  proj.cumulative.reserve(proj.values.items().size());
  std::uint64_t running = 0;
  for (const auto& item : proj.values.items()) {
    running += item.count;
    proj.cumulative.push_back(running);
  }
  return proj;
}

namespace {

__extension__ typedef unsigned __int128 Wide;

// ceil(s * N) computed exactly, for s in [0, 1].
std::uint64_t ceil_product(double s, std::uint64_t N) {
  if (s <= 0.0) return 0;
  int e = 0;
  const double f = std::frexp(s, &e);  // s = f 2^e, f in [1/2, 1)
  const auto m = static_cast<std::uint64_t>(std::ldexp(f, 53));
  const int k = 53 - e;  // s = m 2^-k, k >= 52
  const Wide mN = static_cast<Wide>(m) * N;
  if (k >= 128) return 1;
  const Wide one = 1;
  return static_cast<std::uint64_t>((mN + ((one << k) - 1)) >> k);
}

// Largest double d with d * N <= c. Rounding the cdf down keeps the
// quantile/cdf pair a Galois connection in floating point.
double fraction_down(std::uint64_t c, std::uint64_t N) {
  double d = static_cast<double>(static_cast<long double>(c) / static_cast<long double>(N));
  while (d > 0.0 && ceil_product(d, N) > c) d = std::nextafter(d, 0.0);
  return d;
}

}  // namespace

double empirical_cdf(const EmpiricalProjection& proj, double t) {
  const auto items = proj.values.items();
  const auto it = std::upper_bound(items.begin(), items.end(), t,
                                   [](double value, const WeightedValue& w) { return value < w.value; });
  if (it == items.begin()) return 0.0;
  const auto idx = static_cast<std::size_t>(it - items.begin()) - 1;
  return fraction_down(proj.cumulative[idx], proj.total());
}

double empirical_quantile(const EmpiricalProjection& proj, double s) {
  if (!(s > 0.0 && s <= 1.0)) {
    throw DomainError("empirical_quantile: s must lie in (0,1], got " + std::to_string(s));
  }
  if (proj.values.empty()) throw DomainError("empirical_quantile: empty projection");
  // The smallest value whose cumulative count c satisfies c >= s N exactly.
  const std::uint64_t needed = ceil_product(s, proj.total());
  const auto it = std::lower_bound(proj.cumulative.begin(), proj.cumulative.end(), needed);
  const auto idx = it == proj.cumulative.end() ? proj.cumulative.size() - 1
                                               : static_cast<std::size_t>(it - proj.cumulative.begin());
  return proj.values.items()[idx].value;
}

QuantileBandReport quantile_band_report(const RowGroupMatrix& matrix, std::span<const double> theta,
                                        double delta, int grid_size) {
  if (matrix.truncated()) {
    throw DomainError("quantile bands assume rows of norm sqrt(n); refusing a column-truncated matrix");
  }
  return quantile_band_report(project(matrix, theta), matrix.spec().n, delta, grid_size);
}

QuantileBandReport quantile_band_report(const EmpiricalProjection& proj, int n, double delta,
                                        int grid_size) {
  if (!(delta > 0.0 && delta < kMaxDelta)) throw DomainError("delta must lie in (0, 1/17)");
  const SphericalMarginal marginal(n);
  const auto points = grid_points(proj, marginal, grid_size);
  const Thresholds th = thresholds(marginal, delta);

  QuantileBandReport report;
  report.n = n;
  report.delta = delta;
  report.a = th.a;
  report.b = th.b;
  report.rows.reserve(points.size());
  for (const auto& p : points) {
    const Evaluated e = evaluate(p, th, delta, marginal.support_edge());
    BandRow row{p.s,      p.empirical, p.reference, e.deviation, e.band, e.regime,
                e.deviation <= e.band,
                near(p.s, th.a) || near(p.s, th.tail_a) || near(p.s, th.b) || near(p.s, th.tail_b)};
    report.pass = report.pass && row.pass;
    const double ratio = e.band > 0.0 ? e.deviation / e.band
                                      : (e.deviation > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    report.max_ratio = std::max(report.max_ratio, ratio);
    report.rows.push_back(row);
  }
  return report;
}

double effective_delta(const EmpiricalProjection& proj, int n, int grid_size) {
  const SphericalMarginal marginal(n);
  const auto points = grid_points(proj, marginal, grid_size);
  const double sqrt_n = marginal.support_edge();

  std::vector<double> candidates{0.0};
  auto push = [&](double d) {
    if (d >= 0.0 && d < kMaxDelta && std::isfinite(d)) candidates.push_back(d);
  };
  // A tight candidate can miss its own band by one rounding step.
  auto push_tight = [&](double d) {
    push(d);
    push(std::nextafter(d, 1.0));
  };
  for (const auto& p : points) {
    push_tight(p.dev_reference / 7.0);
    if (p.reference != 0.0) push_tight(p.dev_reference / (20.0 * std::abs(p.reference)));
    push_tight(p.dev_edge / (29.0 * sqrt_n));
    // delta at which s crosses b (or 1 - b) and switches to the tail regime.
    const double cross = (1.0 - std::abs(p.reference) / sqrt_n) / 17.0;
    push(cross);
    push(std::nextafter(cross, 1.0));
    push(cross * (1.0 + 1e-12));
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  for (double d : candidates) {
    if (d == 0.0) {
      const bool exact = std::all_of(points.begin(), points.end(), [](const GridPoint& p) {
        return p.dev_reference == 0.0;
      });
      if (exact) return 0.0;
      continue;
    }
    if (all_pass(points, marginal, d)) return d;
  }
  return std::numeric_limits<double>::infinity();
}

std::vector<std::vector<double>> sphere_sample(int n, std::size_t count, std::uint64_t seed) {
  if (n < 1) throw DomainError("sphere_sample: n must be >= 1");
  if (count < 1) throw DomainError("sphere_sample: count must be >= 1");
  CounterRng rng(seed);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  while (out.size() < count) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    const double norm = euclidean_norm(x);
    if (!(norm > 0.0)) continue;
    for (double& v : x) v /= norm;
    out.push_back(std::move(x));
  }
  return out;
}

DistortionReport distortion_sweep(const RowGroupMatrix& matrix, const PermInvariantNorm& norm,
                                  std::span<const std::vector<double>> thetas, double M,
                                  unsigned threads) {
  if (!(M > 0.0)) throw DomainError("distortion_sweep: M must be positive");
  if (thetas.empty()) throw DomainError("distortion_sweep: no directions given");
  DistortionReport report;
  report.ratios.assign(thetas.size(), 0.0);
  std::vector<unsigned char> non_unit(thetas.size(), 0);
  detail::parallel_chunks(thetas.size(), threads, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      non_unit[i] = std::abs(euclidean_norm(thetas[i]) - 1.0) > kUnitTolerance;
      report.ratios[i] = norm.eval(pinembed::apply(matrix, thetas[i])) / M;
    }
  });
  report.non_unit_input = std::any_of(non_unit.begin(), non_unit.end(), [](unsigned char c) { return c != 0; });
  const auto [lo, hi] = std::minmax_element(report.ratios.begin(), report.ratios.end());
  report.min_ratio = *lo;
  report.max_ratio = *hi;
  report.distortion = std::max(report.max_ratio - 1.0, 1.0 - report.min_ratio);
  report.histogram.assign(kHistogramBins, 0);
  const double width = (report.max_ratio - report.min_ratio) / kHistogramBins;
  for (double r : report.ratios) {
    int bin = 0;
    if (width > 0.0) bin = std::min(kHistogramBins - 1, static_cast<int>((r - report.min_ratio) / width));
    ++report.histogram[bin];
  }
  return report;
}

std::array<double, 12> l4_reference_embedding(std::span<const double, 4> x) {
  const double scale = std::pow(6.0, -0.25);
  std::array<double, 12> out{};
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      out[k] = scale * (x[i] + x[j]);
      out[k + 6] = scale * (x[i] - x[j]);
      ++k;
    }
  }
  return out;
}

}  // namespace pinembed
