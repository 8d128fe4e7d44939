#pragma once

// The embedding matrix T in row-group form, and the reference vector v whose
// norm M is the scale the embedding is centered on.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pinembed/lattice.hpp"
#include "pinembed/norms.hpp"

namespace pinembed {

enum class Mode { paper, desk };

std::string to_string(Mode mode);
Mode parse_mode(std::string_view text);

/// Parameter bundle of one construction.
///
/// Paper mode derives delta = epsilon/1429, sigma = delta^-4 and
/// alpha = 2 delta^-4 sqrt(log(1/delta)); those values are far too large to
/// enumerate and are kept as metadata. Desk mode takes sigma, alpha and N
/// from the caller.
struct EmbeddingSpec {
  int n = 6;
  std::uint64_t N = 0;
  double epsilon = 0.0;
  double K = 1.0;
  double delta = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;
  Mode mode = Mode::desk;

  /// Natural log of the lower bound N must exceed for the cell-count
  /// argument: delta^-1 sigma exp[(sigma^-2 (alpha+1/2)^2 + log 2pi + log sigma^2) n / 2].
  double log_N_lower_bound = 0.0;
  bool N_bound_satisfied = false;
  /// 6 <= n <= c log(N) / log(1/epsilon) with c = 1/100.
  bool dimension_condition = false;

  double radius() const;

  friend bool operator==(const EmbeddingSpec&, const EmbeddingSpec&) = default;
};

struct PlanOverrides {
  std::optional<int> n;
  std::optional<std::uint64_t> N;
  std::optional<double> sigma;
  std::optional<double> alpha;
  /// Alternative to alpha: the truncation radius alpha*sqrt(n).
  std::optional<double> radius;
  std::optional<double> delta;
};

/// Throws DomainError for epsilon outside (0,1), K < 1, or (paper mode)
/// epsilon >= 1/(2K); ConfigError when desk mode lacks sigma, alpha/radius
/// or N, or when paper mode is given construction overrides.
EmbeddingSpec plan_parameters(double epsilon, double K, Mode mode, const PlanOverrides& overrides = {});

/// Re-checks a spec built elsewhere (e.g. loaded from disk).
void validate(const EmbeddingSpec& spec);

/// Compact form of T: every distinct row sqrt(n) x/|x| once, with its
/// multiplicity m'(x). Groups follow lexicographic lattice order; the origin
/// maps to the zero row.
class RowGroupMatrix {
 public:
  RowGroupMatrix(EmbeddingSpec spec, PointList points, std::vector<double> directions,
                 std::vector<std::uint64_t> multiplicities, int columns, bool truncated);

  const EmbeddingSpec& spec() const noexcept { return spec_; }
  std::size_t group_count() const noexcept { return multiplicities_.size(); }
  int columns() const noexcept { return columns_; }
  bool truncated() const noexcept { return truncated_; }

  std::span<const Coord> lattice_point(std::size_t g) const { return points_[g]; }
  std::span<const double> direction(std::size_t g) const {
    return {directions_.data() + g * columns_, static_cast<std::size_t>(columns_)};
  }
  std::uint64_t multiplicity(std::size_t g) const { return multiplicities_[g]; }

  const PointList& lattice_points() const noexcept { return points_; }
  const std::vector<double>& directions() const noexcept { return directions_; }
  const std::vector<std::uint64_t>& multiplicities() const noexcept { return multiplicities_; }

  /// Sum of multiplicities; equals spec().N.
  std::uint64_t rows() const noexcept;

  friend bool operator==(const RowGroupMatrix&, const RowGroupMatrix&) = default;

 private:
  EmbeddingSpec spec_;
  PointList points_;
  std::vector<double> directions_;
  std::vector<std::uint64_t> multiplicities_;
  int columns_;
  bool truncated_;
};

RowGroupMatrix build_matrix(const EmbeddingSpec& spec, const EnumerationOptions& options = {});
RowGroupMatrix build_matrix(const EmbeddingSpec& spec, const MultiplicityTable& table);

/// The multiset {(<row, x>, multiplicity)}; zero-multiplicity groups are
/// skipped. Throws DomainError if x.size() != columns().
WeightedMultiset apply(const RowGroupMatrix& matrix, std::span<const double> x);

/// First k columns of T, for embedding l_2^k with k < n.
RowGroupMatrix truncate_columns(const RowGroupMatrix& matrix, int k);

enum class ProfilePath { automatic, entrywise, quadrature };

/// The non-decreasing reference vector v in bucketed form:
///   v_i = -sqrt(n)               for i - 1/2 <  (1-b) N
///   v_i = Phi_n^-1((i-1/2)/N)    for (1-b) N <= i - 1/2 <= b N
///   v_i = +sqrt(n)               for i - 1/2 >  b N
/// with a = Phi_n(1.5) and b = Phi_n((1 - 17 delta) sqrt(n)).
struct ReferenceProfile {
  int n = 0;
  std::uint64_t N = 0;
  double a = 0.0;
  double b = 0.0;
  WeightedMultiset v;
  bool entrywise = true;
  int resolution = 0;
  /// Largest spread of Phi_n^-1 across one quadrature slice, divided by
  /// sqrt(n). Zero on the entrywise path.
  double bucket_width_bound = 0.0;
  std::uint64_t low_count = 0;   // entries equal to -sqrt(n)
  std::uint64_t high_count = 0;  // entries equal to +sqrt(n)

  std::string exactness() const;
};

inline constexpr std::uint64_t kEntrywiseThreshold = 10'000'000;

/// Entrywise when N <= kEntrywiseThreshold (or forced); otherwise the middle
/// range is split into `resolution` equal-probability slices whose counts are
/// apportioned by largest remainder, so the counts still sum to N.
ReferenceProfile reference_profile(const EmbeddingSpec& spec, int resolution,
                                   ProfilePath path = ProfilePath::automatic);

/// M = ||v||.
double scaling_constant(const ReferenceProfile& profile, const PermInvariantNorm& norm);

}  // namespace pinembed
