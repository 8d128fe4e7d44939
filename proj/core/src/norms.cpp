#include "pinembed/norms.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "pinembed/error.hpp"

namespace pinembed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kBisectionSteps = 200;

// Neumaier-compensated sum in extended precision.
class CompensatedSum {
 public:
  void add(long double x) {
    const long double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  long double value() const { return sum_ + compensation_; }

 private:
  long double sum_ = 0.0L;
  long double compensation_ = 0.0L;
};

double max_abs(const WeightedMultiset& w) {
  double m = 0.0;
  for (const auto& item : w.items()) m = std::max(m, std::abs(item.value));
  return m;
}

double eval_lp(double p, const WeightedMultiset& w) {
  const double m = max_abs(w);
  if (m == 0.0 || std::isinf(p)) return m;
  CompensatedSum sum;
  for (const auto& item : w.items()) {
    const long double r = std::abs(item.value) / m;
    long double powered;
    if (p == 1.0) powered = r;
    else if (p == 2.0) powered = r * r;
    else powered = std::pow(r, static_cast<long double>(p));
    sum.add(powered * static_cast<long double>(item.count));
  }
  return static_cast<double>(m * std::pow(sum.value(), 1.0L / p));
}

double eval_topk(std::uint64_t k, const WeightedMultiset& w) {
  if (k > w.total()) {
    throw DomainError("topk: k = " + std::to_string(k) + " exceeds multiset total " +
                      std::to_string(w.total()));
  }
  std::vector<WeightedValue> mags;
  mags.reserve(w.items().size());
  for (const auto& item : w.items()) mags.push_back({std::abs(item.value), item.count});
  std::sort(mags.begin(), mags.end(),
            [](const WeightedValue& a, const WeightedValue& b) { return a.value > b.value; });
  CompensatedSum sum;
  std::uint64_t left = k;
  for (const auto& item : mags) {
    if (left == 0) break;
    const std::uint64_t take = std::min(left, item.count);
    sum.add(static_cast<long double>(item.value) * static_cast<long double>(take));
    left -= take;
  }
  return static_cast<double>(sum.value());
}

double orlicz_modular(const OrliczGrowth& g, const WeightedMultiset& w, double lambda) {
  CompensatedSum sum;
  for (const auto& item : w.items()) {
    const double term = g.psi(std::abs(item.value) / lambda);
    if (std::isinf(term)) return kInf;
    sum.add(static_cast<long double>(term) * static_cast<long double>(item.count));
  }
  return static_cast<double>(sum.value());
}

double eval_orlicz(const OrliczGrowth& g, const WeightedMultiset& w) {
  const double m = max_abs(w);
  if (m == 0.0) return 0.0;
  double hi = m;
  int guard = 0;
  while (orlicz_modular(g, w, hi) > 1.0 && guard++ < 4000) hi *= 2.0;
  double lo = hi;
  guard = 0;
  while (orlicz_modular(g, w, lo) <= 1.0 && guard++ < 4000) lo *= 0.5;
  if (orlicz_modular(g, w, lo) <= 1.0) lo = 0.0;
  for (int step = 0; step < kBisectionSteps && hi - lo > 1e-15 * hi; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (orlicz_modular(g, w, mid) <= 1.0) hi = mid;
    else lo = mid;
  }
  return hi;
}

double parse_real(std::string_view text, std::string_view descriptor) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ConfigError("malformed number in norm descriptor '" + std::string(descriptor) + "'");
  }
  return value;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

WeightedMultiset::WeightedMultiset(std::vector<WeightedValue> items) : items_(std::move(items)) {
  for (const auto& item : items_) {
    if (item.count == 0) throw DomainError("multiset counts must be >= 1");
    total_ += item.count;
  }
}

void WeightedMultiset::add(double value, std::uint64_t count) {
  if (count == 0) return;
  items_.push_back({value, count});
  total_ += count;
}

void WeightedMultiset::sort_and_merge() {
  std::sort(items_.begin(), items_.end(),
            [](const WeightedValue& a, const WeightedValue& b) { return a.value < b.value; });
  std::vector<WeightedValue> merged;
  merged.reserve(items_.size());
  for (const auto& item : items_) {
    if (!merged.empty() && merged.back().value == item.value) {
      merged.back().count += item.count;
    } else {
      merged.push_back(item);
    }
  }
  items_ = std::move(merged);
}

WeightedMultiset WeightedMultiset::scaled(double factor) const {
  WeightedMultiset out = *this;
  for (auto& item : out.items_) item.value *= factor;
  return out;
}

std::vector<double> WeightedMultiset::expand() const {
  std::vector<double> out;
  out.reserve(total_);
  for (const auto& item : items_) out.insert(out.end(), item.count, item.value);
  return out;
}

OrliczGrowth OrliczGrowth::exp2() {
  return {"exp2", [](double t) { return std::expm1(t * t); }};
}

OrliczGrowth OrliczGrowth::power(double p) {
  if (!(p >= 1.0) || std::isinf(p)) throw ConfigError("orlicz:pow requires finite p >= 1");
  return {"pow:" + format_real(p), [p](double t) { return std::pow(t, p); }};
}

PermInvariantNorm PermInvariantNorm::lp(double p) {
  if (!(p >= 1.0)) throw ConfigError("lp norm requires p >= 1");
  return PermInvariantNorm(Lp{p});
}

PermInvariantNorm PermInvariantNorm::linf() { return PermInvariantNorm(Lp{kInf}); }

PermInvariantNorm PermInvariantNorm::topk(std::uint64_t k) {
  if (k == 0) throw ConfigError("topk requires k >= 1");
  return PermInvariantNorm(TopK{k});
}

PermInvariantNorm PermInvariantNorm::orlicz(OrliczGrowth growth) {
  if (!growth.psi) throw ConfigError("orlicz growth function is empty");
  constexpr int kSamples = 4096;
  constexpr double kSpan = 16.0;
  if (growth.psi(0.0) != 0.0) throw ConfigError("orlicz growth must satisfy psi(0) = 0");
  double previous = 0.0;
  bool positive = false;
  for (int i = 1; i <= kSamples; ++i) {
    const double value = growth.psi(kSpan * i / kSamples);
    if (std::isnan(value) || value < previous) {
      throw ConfigError("orlicz growth '" + growth.name + "' is not non-decreasing");
    }
    positive = positive || value > 0.0;
    previous = value;
  }
  if (!positive) throw ConfigError("orlicz growth '" + growth.name + "' is identically zero");
  return PermInvariantNorm(Orlicz{std::move(growth)});
}

PermInvariantNorm PermInvariantNorm::parse(std::string_view descriptor) {
  const auto colon = descriptor.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("norm descriptor '" + std::string(descriptor) + "' lacks ':'");
  }
  const std::string_view family = descriptor.substr(0, colon);
  const std::string_view arg = descriptor.substr(colon + 1);
  if (family == "lp") {
    if (arg == "inf") return linf();
    return lp(parse_real(arg, descriptor));
  }
  if (family == "topk") {
    std::uint64_t k = 0;
    const auto* end = arg.data() + arg.size();
    const auto [ptr, ec] = std::from_chars(arg.data(), end, k);
    if (ec != std::errc() || ptr != end || arg.empty()) {
      throw ConfigError("malformed k in norm descriptor '" + std::string(descriptor) + "'");
    }
    return topk(k);
  }
  if (family == "orlicz") {
    if (arg == "exp2") return orlicz(OrliczGrowth::exp2());
    if (arg.starts_with("pow:")) return orlicz(OrliczGrowth::power(parse_real(arg.substr(4), descriptor)));
  }
  throw ConfigError("unknown norm descriptor '" + std::string(descriptor) + "'");
}

std::string PermInvariantNorm::descriptor() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Lp>) {
          return std::isinf(k.p) ? "lp:inf" : "lp:" + format_real(k.p);
        } else if constexpr (std::is_same_v<T, TopK>) {
          return "topk:" + std::to_string(k.k);
        } else {
          return "orlicz:" + k.growth.name;
        }
      },
      kind_);
}

PermInvariantNorm PermInvariantNorm::with_basis_constant(double K) const {
  if (!(K >= 1.0)) throw ConfigError("basis constant must be >= 1");
  PermInvariantNorm out = *this;
  out.basis_constant_ = K;
  return out;
}

double PermInvariantNorm::eval(const WeightedMultiset& w) const {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Lp>) return eval_lp(k.p, w);
        else if constexpr (std::is_same_v<T, TopK>) return eval_topk(k.k, w);
        else return eval_orlicz(k.growth, w);
      },
      kind_);
}

TriangleReport dual_check(const PermInvariantNorm& norm, const WeightedMultiset& w1,
                          const WeightedMultiset& w2) {
  if (w1.total() != w2.total()) throw DomainError("dual_check requires equal totals");
  WeightedMultiset a = w1;
  WeightedMultiset b = w2;
  a.sort_and_merge();
  b.sort_and_merge();

  // Walk both sorted expansions in lockstep without materializing them.
  WeightedMultiset sum;
  auto ia = a.items().begin();
  auto ib = b.items().begin();
  std::uint64_t left_a = ia != a.items().end() ? ia->count : 0;
  std::uint64_t left_b = ib != b.items().end() ? ib->count : 0;
  while (ia != a.items().end() && ib != b.items().end()) {
    const std::uint64_t take = std::min(left_a, left_b);
    sum.add(ia->value + ib->value, take);
    left_a -= take;
    left_b -= take;
    if (left_a == 0 && ++ia != a.items().end()) left_a = ia->count;
    if (left_b == 0 && ++ib != b.items().end()) left_b = ib->count;
  }
  const double lhs = norm.eval(sum);
  const double rhs = norm.eval(w1) + norm.eval(w2);
  return {lhs, rhs, lhs <= rhs + 1e-10 * std::max(1.0, rhs)};
}

}  // namespace pinembed
