#pragma once

// Integer points of a Euclidean ball and their Gaussian-cell multiplicities.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pinembed {

using Coord = std::int32_t;

/// A single point of Z^n.
struct LatticePoint {
  std::vector<Coord> coords;

  int dim() const noexcept { return static_cast<int>(coords.size()); }
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

/// Contiguous storage for many lattice points of the same dimension,
/// kept in insertion order.
class PointList {
 public:
  explicit PointList(int dim = 0) : dim_(dim) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const Coord> operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }
  LatticePoint point(std::size_t i) const {
    auto c = (*this)[i];
    return {{c.begin(), c.end()}};
  }

  void push_back(std::span<const Coord> p) { coords_.insert(coords_.end(), p.begin(), p.end()); }
  void append(const PointList& other) {
    coords_.insert(coords_.end(), other.coords_.begin(), other.coords_.end());
  }
  void reserve(std::size_t points) { coords_.reserve(points * dim_); }

  const std::vector<Coord>& raw() const noexcept { return coords_; }

  friend bool operator==(const PointList&, const PointList&) = default;

 private:
  int dim_;
  std::vector<Coord> coords_;
};

struct EnumerationOptions {
  /// Refuse enumeration when the estimated point count exceeds this.
  double cap = 1e8;
  /// Worker threads; 0 means hardware concurrency. Output does not depend on it.
  unsigned threads = 1;
};

/// Upper estimate of #(Z^n intersected with radius*B_2^n): the volume of the
/// ball of radius radius + sqrt(n)/2, which contains every unit cube centered
/// at an enumerated point.
double estimate_ball_points(int n, double radius);

/// All x in Z^n with |x|_2 <= radius, in lexicographic order. Points within
/// relative 1e-12 of the boundary (in squared norm) count as inside.
/// Throws CapacityError when estimate_ball_points exceeds options.cap.
PointList enumerate_ball(int n, double radius, const EnumerationOptions& options = {});

struct CellProbability {
  double log_p;
  double p;
};

/// Gaussian mass of the unit cube centered at `point` under N(0, sigma^2 I).
CellProbability cell_probability(std::span<const Coord> point, double sigma);

/// Multiplicities m(x) = floor(N p(x)) over the lattice ball of radius
/// alpha*sqrt(n), with the deficit N - N' assigned to the origin.
struct MultiplicityTable {
  PointList points;
  std::vector<std::uint64_t> m;
  std::vector<std::uint64_t> m_prime;
  std::uint64_t N = 0;
  std::uint64_t N_prime = 0;
  double sigma = 0.0;
  double alpha = 0.0;
  double radius = 0.0;
  std::size_t zero_index = 0;
  /// Number of floors resolved with 50-digit arithmetic.
  std::size_t high_precision_floors = 0;

  int dim() const noexcept { return points.dim(); }
  std::size_t size() const noexcept { return points.size(); }
};

/// Builds the table for Z^n intersected with alpha*sqrt(n)*B_2^n.
///
/// Floors of N p(x) are computed from a double-double product of the
/// per-coordinate cell masses. When N p(x) lies within relative 1e-9 of an
/// integer, that single floor is recomputed with 50-digit arithmetic.
MultiplicityTable build_multiplicities(int n, std::uint64_t N, double sigma, double alpha,
                                       const EnumerationOptions& options = {});

}  // namespace pinembed
