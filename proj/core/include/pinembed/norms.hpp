#pragma once

// Permutation-invariant norms evaluated on (value, multiplicity) multisets.
// A multiset cannot express coordinate order, so every norm here is
// permutation invariant by construction, and cost scales with the number of
// distinct entries rather than with the ambient dimension.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pinembed {

struct WeightedValue {
  double value;
  std::uint64_t count;

  friend bool operator==(const WeightedValue&, const WeightedValue&) = default;
};

class WeightedMultiset {
 public:
  WeightedMultiset() = default;
  /// Throws DomainError if any count is zero.
  explicit WeightedMultiset(std::vector<WeightedValue> items);

  /// Appends an entry; count 0 is ignored.
  void add(double value, std::uint64_t count);

  std::span<const WeightedValue> items() const noexcept { return items_; }
  std::uint64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return items_.empty(); }

  /// Sorts ascending by value and merges entries with equal values.
  void sort_and_merge();

  WeightedMultiset scaled(double factor) const;

  /// Fully expanded vector (tests and small inputs only).
  std::vector<double> expand() const;

  friend bool operator==(const WeightedMultiset&, const WeightedMultiset&) = default;

 private:
  std::vector<WeightedValue> items_;
  std::uint64_t total_ = 0;
};

/// Growth function psi of an Orlicz (Luxemburg) norm:
/// ||w|| = inf{ lambda > 0 : sum count * psi(|value| / lambda) <= 1 }.
struct OrliczGrowth {
  std::string name;
  std::function<double(double)> psi;

  /// psi(t) = exp(t^2) - 1.
  static OrliczGrowth exp2();
  /// psi(t) = t^p, p >= 1.
  static OrliczGrowth power(double p);
};

class PermInvariantNorm {
 public:
  struct Lp {
    double p;  // +infinity for the max norm
  };
  struct TopK {
    std::uint64_t k;
  };
  struct Orlicz {
    OrliczGrowth growth;
  };
  using Kind = std::variant<Lp, TopK, Orlicz>;

  static PermInvariantNorm lp(double p);
  static PermInvariantNorm linf();
  static PermInvariantNorm topk(std::uint64_t k);
  /// Throws ConfigError unless psi(0) = 0 and psi is non-decreasing and not
  /// identically zero on a sample grid.
  static PermInvariantNorm orlicz(OrliczGrowth growth);

  /// Grammar:  lp:<p> | lp:inf | topk:<k> | orlicz:exp2 | orlicz:pow:<p>
  /// Throws ConfigError on anything else.
  static PermInvariantNorm parse(std::string_view descriptor);

  /// Canonical descriptor; parse(descriptor()) reproduces the norm.
  std::string descriptor() const;

  const Kind& kind() const noexcept { return kind_; }

  /// Declared basis constant K. The built-in norms are 1-unconditional and
  /// 1-symmetric, so it defaults to 1.
  double basis_constant() const noexcept { return basis_constant_; }
  PermInvariantNorm with_basis_constant(double K) const;

  double eval(const WeightedMultiset& w) const;

 private:
  explicit PermInvariantNorm(Kind kind) : kind_(std::move(kind)) {}

  Kind kind_;
  double basis_constant_ = 1.0;
};

inline double eval(const PermInvariantNorm& norm, const WeightedMultiset& w) {
  return norm.eval(w);
}

struct TriangleReport {
  double lhs;  // ||w1 + w2||
  double rhs;  // ||w1|| + ||w2||
  bool holds;
};

/// Triangle inequality for the sorted alignment of two multisets with equal
/// totals: the i-th smallest entries of w1 and w2 are added together.
TriangleReport dual_check(const PermInvariantNorm& norm, const WeightedMultiset& w1,
                          const WeightedMultiset& w2);

}  // namespace pinembed
