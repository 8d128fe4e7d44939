#include "pinembed/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "pinembed/error.hpp"
#include "pinembed/spherical_dist.hpp"

namespace pinembed {

namespace {

constexpr double kDeltaDivisor = 1429.0;
constexpr double kDimensionConstant = 1.0 / 100.0;
constexpr std::uint64_t kDefaultPaperN = std::numeric_limits<std::int64_t>::max();

double log_N_bound(int n, double delta, double sigma, double alpha) {
  const double scaled = (alpha + 0.5) / sigma;
  return -std::log(delta) + std::log(sigma) +
         0.5 * (scaled * scaled + std::log(2.0 * std::numbers::pi) + 2.0 * std::log(sigma)) * n;
}

void fill_metadata(EmbeddingSpec& spec) {
  spec.log_N_lower_bound = log_N_bound(spec.n, spec.delta, spec.sigma, spec.alpha);
  const double log_N = std::log(static_cast<double>(spec.N));
  spec.N_bound_satisfied = log_N >= spec.log_N_lower_bound;
  spec.dimension_condition =
      spec.n >= 6 && spec.n <= kDimensionConstant * log_N / std::log(1.0 / spec.epsilon);
}

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::paper ? "paper" : "desk"; }

Mode parse_mode(std::string_view text) {
  if (text == "paper") return Mode::paper;
  if (text == "desk") return Mode::desk;
  throw ConfigError("unknown mode '" + std::string(text) + "' (expected paper|desk)");
}

double EmbeddingSpec::radius() const { return alpha * std::sqrt(static_cast<double>(n)); }

EmbeddingSpec plan_parameters(double epsilon, double K, Mode mode, const PlanOverrides& overrides) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
  if (!(K >= 1.0)) throw DomainError("basis constant K must be >= 1");

  EmbeddingSpec spec;
  spec.epsilon = epsilon;
  spec.K = K;
  spec.mode = mode;
  spec.n = overrides.n.value_or(6);
  if (spec.n < 1) throw DomainError("n must be >= 1");

  if (mode == Mode::paper) {
    if (!(epsilon < 1.0 / (2.0 * K))) {
      throw DomainError("paper mode requires epsilon < 1/(2K) = " + std::to_string(1.0 / (2.0 * K)));
    }
    if (overrides.sigma || overrides.alpha || overrides.radius || overrides.delta) {
      throw ConfigError("paper mode derives delta, sigma and alpha; overrides are not accepted");
    }
    spec.N = overrides.N.value_or(kDefaultPaperN);
    spec.delta = epsilon / kDeltaDivisor;
    spec.sigma = std::pow(spec.delta, -4.0);
    spec.alpha = 2.0 * spec.sigma * std::sqrt(std::log(1.0 / spec.delta));
  } else {
    if (!overrides.sigma || !(overrides.alpha || overrides.radius) || !overrides.N) {
      throw ConfigError("desk mode requires sigma, alpha (or radius) and N");
    }
    if (overrides.alpha && overrides.radius) {
      throw ConfigError("give either alpha or radius, not both");
    }
    spec.N = *overrides.N;
    spec.sigma = *overrides.sigma;
    spec.alpha = overrides.alpha ? *overrides.alpha
                                 : *overrides.radius / std::sqrt(static_cast<double>(spec.n));
    spec.delta = overrides.delta.value_or(epsilon / kDeltaDivisor);
  }
  validate(spec);
  fill_metadata(spec);
  return spec;
}

void validate(const EmbeddingSpec& spec) {
  if (spec.n < 1) throw DomainError("n must be >= 1");
  if (spec.N < 1) throw DomainError("N must be >= 1");
  if (spec.N > kDefaultPaperN) throw DomainError("N must be <= 2^63 - 1");
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) throw DomainError("epsilon must lie in (0,1)");
  if (!(spec.K >= 1.0)) throw DomainError("K must be >= 1");
  if (!(spec.delta > 0.0 && spec.delta < 1.0 / 17.0)) {
    throw DomainError("delta must lie in (0, 1/17)");
  }
  if (spec.mode == Mode::desk) {
    if (!(spec.sigma >= 1.0)) throw ConfigError("desk mode requires sigma >= 1");
    // Relative slack for radius = alpha*sqrt(n) round trips.
    if (!(spec.radius() >= spec.sigma * (1.0 - 1e-12))) {
      throw ConfigError("desk mode requires alpha*sqrt(n) >= sigma");
    }
  }
}

RowGroupMatrix::RowGroupMatrix(EmbeddingSpec spec, PointList points, std::vector<double> directions,
                               std::vector<std::uint64_t> multiplicities, int columns, bool truncated)
    : spec_(std::move(spec)),
      points_(std::move(points)),
      directions_(std::move(directions)),
      multiplicities_(std::move(multiplicities)),
      columns_(columns),
      truncated_(truncated) {
  if (columns_ < 1 || columns_ > spec_.n) throw DomainError("column count out of range");
  if (points_.size() != multiplicities_.size() ||
      directions_.size() != multiplicities_.size() * static_cast<std::size_t>(columns_)) {
    throw DomainError("row-group arrays have inconsistent sizes");
  }
}

std::uint64_t RowGroupMatrix::rows() const noexcept {
  return std::accumulate(multiplicities_.begin(), multiplicities_.end(), std::uint64_t{0});
}

RowGroupMatrix build_matrix(const EmbeddingSpec& spec, const EnumerationOptions& options) {
  validate(spec);
  return build_matrix(spec, build_multiplicities(spec.n, spec.N, spec.sigma, spec.alpha, options));
}

RowGroupMatrix build_matrix(const EmbeddingSpec& spec, const MultiplicityTable& table) {
  if (table.dim() != spec.n || table.N != spec.N) {
    throw DomainError("multiplicity table does not match spec");
  }
  const int n = spec.n;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<double> directions(table.size() * n, 0.0);
  for (std::size_t g = 0; g < table.size(); ++g) {
    const auto x = table.points[g];
    std::int64_t sumsq = 0;
    for (Coord c : x) sumsq += static_cast<std::int64_t>(c) * c;
    if (sumsq == 0) continue;
    const double scale = sqrt_n / std::sqrt(static_cast<double>(sumsq));
    for (int j = 0; j < n; ++j) directions[g * n + j] = scale * x[j];
  }
  return RowGroupMatrix(spec, table.points, std::move(directions), table.m_prime, n, false);
}

WeightedMultiset apply(const RowGroupMatrix& matrix, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(matrix.columns())) {
    throw DomainError("apply: vector length " + std::to_string(x.size()) + " != " +
                      std::to_string(matrix.columns()) + " columns");
  }
  WeightedMultiset out;
  for (std::size_t g = 0; g < matrix.group_count(); ++g) {
    const std::uint64_t count = matrix.multiplicity(g);
    if (count == 0) continue;
    const auto d = matrix.direction(g);
    double dot = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j) dot += d[j] * x[j];
    out.add(dot, count);
  }
  return out;
}

RowGroupMatrix truncate_columns(const RowGroupMatrix& matrix, int k) {
  if (k < 1 || k > matrix.columns()) {
    throw DomainError("truncate_columns: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(matrix.columns()) + "]");
  }
  if (k == matrix.columns()) return matrix;
  std::vector<double> directions(matrix.group_count() * k);
  for (std::size_t g = 0; g < matrix.group_count(); ++g) {
    const auto d = matrix.direction(g);
    std::copy_n(d.begin(), k, directions.begin() + g * k);
  }
  return RowGroupMatrix(matrix.spec(), matrix.lattice_points(), std::move(directions),
                        matrix.multiplicities(), k, true);
}

std::string ReferenceProfile::exactness() const {
  return entrywise ? "entrywise" : "quadrature(" + std::to_string(resolution) + ")";
}

ReferenceProfile reference_profile(const EmbeddingSpec& spec, int resolution, ProfilePath path) {
  validate(spec);
  if (resolution < 1) throw DomainError("resolution must be >= 1");

  const SphericalMarginal marginal(spec.n);
  const double sqrt_n = marginal.support_edge();
  const std::uint64_t N = spec.N;

  ReferenceProfile profile;
  profile.n = spec.n;
  profile.N = N;
  profile.a = marginal.Phi(1.5);
  const double tail_b = marginal.upper_tail((1.0 - 17.0 * spec.delta) * sqrt_n);
  profile.b = 1.0 - tail_b;
  profile.entrywise = path == ProfilePath::entrywise ||
                      (path == ProfilePath::automatic && N <= kEntrywiseThreshold);
  profile.resolution = profile.entrywise ? 0 : resolution;

  // low: #{i : i - 1/2 < (1-b) N};  high: #{i : i - 1/2 > b N}.
  const long double Nl = static_cast<long double>(N);
  const long double low_edge = static_cast<long double>(tail_b) * Nl + 0.5L;
  const long double high_edge = (1.0L - static_cast<long double>(tail_b)) * Nl + 0.5L;
  std::uint64_t low = 0;
  if (low_edge > 0.0L) {
    const long double c = std::ceil(low_edge) - 1.0L;
    low = c >= Nl ? N : static_cast<std::uint64_t>(std::max(0.0L, c));
  }
  std::uint64_t high = 0;
  {
    const long double f = std::floor(high_edge);
    high = f >= Nl ? 0 : N - static_cast<std::uint64_t>(std::max(0.0L, f));
  }
  high = std::min(high, N - low);
  const std::uint64_t middle = N - low - high;
  profile.low_count = low;
  profile.high_count = high;

  WeightedMultiset& v = profile.v;
  v.add(-sqrt_n, low);

  if (profile.entrywise) {
    double last = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t run = 0;
    for (std::uint64_t i = low + 1; i <= low + middle; ++i) {
      const double s = static_cast<double>((static_cast<long double>(i) - 0.5L) / Nl);
      const double value = marginal.Phi_inv(s);
      if (run > 0 && value == last) {
        ++run;
        continue;
      }
      if (run > 0) v.add(last, run);
      last = value;
      run = 1;
    }
    if (run > 0) v.add(last, run);
  } else if (middle > 0) {
    const auto slices = static_cast<std::uint64_t>(std::min<std::uint64_t>(resolution, middle));
    const long double p_lo = static_cast<long double>(low) / Nl;
    const long double p_hi = static_cast<long double>(low + middle) / Nl;
    const long double width = (p_hi - p_lo) / static_cast<long double>(slices);

    // Largest-remainder apportionment of the equal quotas middle/slices.
    std::vector<std::uint64_t> counts(slices, middle / slices);
    std::uint64_t remainder = middle % slices;
    // Equal quotas have equal remainders; hand the extras out from the
    // center outward so the profile stays symmetric when it can.
    std::vector<std::uint64_t> order(slices);
    std::iota(order.begin(), order.end(), std::uint64_t{0});
    const long double center = (static_cast<long double>(slices) - 1.0L) / 2.0L;
    std::stable_sort(order.begin(), order.end(), [&](std::uint64_t x, std::uint64_t y) {
      return std::abs(static_cast<long double>(x) - center) < std::abs(static_cast<long double>(y) - center);
    });
    for (std::uint64_t r = 0; r < remainder; ++r) ++counts[order[r]];

    auto quantile = [&](long double p) {
      if (p <= 0.0L) return -sqrt_n;
      if (p >= 1.0L) return sqrt_n;
      return marginal.Phi_inv(static_cast<double>(p));
    };
    double max_width = 0.0;
    double left = quantile(p_lo);
    for (std::uint64_t j = 0; j < slices; ++j) {
      const long double a = p_lo + width * static_cast<long double>(j);
      const double right = quantile(j + 1 == slices ? p_hi : a + width);
      max_width = std::max(max_width, right - left);
      left = right;
      v.add(quantile(a + 0.5L * width), counts[j]);
    }
    profile.bucket_width_bound = max_width / sqrt_n;
  }

  v.add(sqrt_n, high);
  if (v.total() != N) throw InternalError("reference profile counts do not sum to N");
  return profile;
}

double scaling_constant(const ReferenceProfile& profile, const PermInvariantNorm& norm) {
  return norm.eval(profile.v);
}

}  // namespace pinembed
