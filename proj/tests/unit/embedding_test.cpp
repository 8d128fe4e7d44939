#include "pinembed/embedding.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pinembed/error.hpp"
#include "pinembed/spherical_dist.hpp"

namespace pinembed {
namespace {

EmbeddingSpec desk(int n, std::uint64_t N, double sigma, double radius, double epsilon = 0.1,
                   std::optional<double> delta = std::nullopt) {
  PlanOverrides o;
  o.n = n;
  o.N = N;
  o.sigma = sigma;
  o.radius = radius;
  o.delta = delta;
  return plan_parameters(epsilon, 1.0, Mode::desk, o);
}

TEST(PlanParameters, PaperModeFormulas) {
  const auto s = plan_parameters(0.1429, 1.0, Mode::paper);
  EXPECT_NEAR(s.delta, 1e-4, 1e-19);
  EXPECT_NEAR(s.sigma / 1e16, 1.0, 1e-12);
  EXPECT_NEAR(s.alpha / 60697085175405854.035, 1.0, 1e-12);
  EXPECT_EQ(s.n, 6);
  EXPECT_EQ(s.N, static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()));
  EXPECT_FALSE(s.N_bound_satisfied);
  EXPECT_FALSE(s.dimension_condition);
  EXPECT_EQ(s.mode, Mode::paper);
}

TEST(PlanParameters, PaperLowerBoundOnN) {
  const auto s = plan_parameters(0.1429, 1.0, Mode::paper);
  const double d = s.delta, sg = s.sigma, al = s.alpha;
  const double expected = std::log(1.0 / d) + std::log(sg) +
                          0.5 * (std::pow((al + 0.5) / sg, 2) + std::log(2.0 * M_PI) + std::log(sg * sg)) * s.n;
  EXPECT_NEAR(s.log_N_lower_bound, expected, 1e-9 * expected);
}

TEST(PlanParameters, DeskEchoesOverrides) {
  const auto s = desk(6, 1000000000ull, 6.0, 24.0);
  EXPECT_EQ(s.sigma, 6.0);
  EXPECT_NEAR(s.radius(), 24.0, 1e-13);
  EXPECT_EQ(s.N, 1000000000ull);
  EXPECT_FALSE(s.N_bound_satisfied);
  EXPECT_NEAR(s.delta, 0.1 / 1429.0, 1e-18);
  EXPECT_EQ(desk(3, 10, 2.0, 4.0, 0.1, 0.01).delta, 0.01);
}

TEST(PlanParameters, Errors) {
  EXPECT_THROW(plan_parameters(0.6, 1.0, Mode::paper), DomainError);
  EXPECT_NO_THROW(plan_parameters(0.1, 2.0, Mode::paper));
  EXPECT_THROW(plan_parameters(0.3, 2.0, Mode::paper), DomainError);
  EXPECT_THROW(plan_parameters(0.0, 1.0, Mode::paper), DomainError);
  EXPECT_THROW(plan_parameters(0.1, 0.5, Mode::paper), DomainError);
  EXPECT_THROW(plan_parameters(0.1, 1.0, Mode::desk), ConfigError);
  PlanOverrides o;
  o.sigma = 2.0;
  EXPECT_THROW(plan_parameters(0.1, 1.0, Mode::paper, o), ConfigError);
  o.N = 100;
  EXPECT_THROW(plan_parameters(0.1, 1.0, Mode::desk, o), ConfigError);  // no alpha or radius
  o.radius = 1.0;  // below sigma
  EXPECT_THROW(plan_parameters(0.1, 1.0, Mode::desk, o), ConfigError);
  EXPECT_THROW(desk(3, 10, 0.5, 4.0), ConfigError);
}

TEST(PlanParameters, ModeStrings) {
  EXPECT_EQ(parse_mode("paper"), Mode::paper);
  EXPECT_EQ(parse_mode(to_string(Mode::desk)), Mode::desk);
  EXPECT_THROW(parse_mode("fast"), ConfigError);
}

TEST(BuildMatrix, DiskOfRadiusTwo) {
  const auto m = build_matrix(desk(2, 100, 1.0, 2.0));
  EXPECT_EQ(m.group_count(), 13u);
  EXPECT_EQ(m.rows(), 100u);
  EXPECT_FALSE(m.truncated());
  std::vector<std::vector<int>> pts;
  for (std::size_t g = 0; g < m.group_count(); ++g) {
    auto p = m.lattice_point(g);
    pts.emplace_back(p.begin(), p.end());
  }
  EXPECT_EQ(pts, oracle::grid_scan_ball(2, 2.0));
}

TEST(BuildMatrix, DirectionsAndSymmetry) {
  const auto m = build_matrix(desk(3, 1000000, 1.5, 4.0));
  const double root = std::sqrt(3.0);
  std::map<std::vector<int>, std::uint64_t> mult;
  for (std::size_t g = 0; g < m.group_count(); ++g) {
    auto p = m.lattice_point(g);
    auto d = m.direction(g);
    const bool origin = p[0] == 0 && p[1] == 0 && p[2] == 0;
    const double len = std::hypot(d[0], d[1], d[2]);
    if (origin) {
      EXPECT_EQ(len, 0.0);
    } else {
      EXPECT_NEAR(len, root, 1e-14 * root);
    }
    mult[{p[0], p[1], p[2]}] = m.multiplicity(g);
  }
  for (const auto& [x, c] : mult) EXPECT_EQ(c, mult.at({-x[0], -x[1], -x[2]}));
}

TEST(Apply, ZeroVectorAndBasisVector) {
  const auto m = build_matrix(desk(2, 100, 1.0, 2.0));
  const double zero[] = {0.0, 0.0};
  const auto w0 = apply(m, zero);
  EXPECT_EQ(w0.total(), 100u);
  for (const auto& item : w0.items()) EXPECT_EQ(item.value, 0.0);

  const double e1[] = {1.0, 0.0};
  const auto w1 = apply(m, e1);
  EXPECT_EQ(w1.total(), 100u);
  WeightedMultiset expected;
  for (std::size_t g = 0; g < m.group_count(); ++g) {
    auto p = m.lattice_point(g);
    const double norm = std::hypot(static_cast<double>(p[0]), static_cast<double>(p[1]));
    expected.add(norm == 0.0 ? 0.0 : std::sqrt(2.0) * p[0] / norm, m.multiplicity(g));
  }
  auto a = w1, b = expected;
  a.sort_and_merge();
  b.sort_and_merge();
  ASSERT_EQ(a.items().size(), b.items().size());
  for (std::size_t i = 0; i < a.items().size(); ++i) {
    EXPECT_NEAR(a.items()[i].value, b.items()[i].value, 1e-15);
    EXPECT_EQ(a.items()[i].count, b.items()[i].count);
  }
  const double wrong[] = {1.0, 0.0, 0.0};
  EXPECT_THROW(apply(m, wrong), DomainError);
}

TEST(Apply, HomogeneityThroughPipeline) {
  const auto m = build_matrix(desk(4, 1000000000ull, 1.5, 4.5));
  const double x[] = {0.3, -1.2, 0.7, 2.0};
  for (const auto& norm : {PermInvariantNorm::lp(1), PermInvariantNorm::lp(2), PermInvariantNorm::linf(),
                           PermInvariantNorm::topk(1000)}) {
    const double base = norm.eval(apply(m, x));
    for (double lambda : {-2.5, 0.125, 3.0}) {
      double y[4];
      for (int i = 0; i < 4; ++i) y[i] = lambda * x[i];
      EXPECT_NEAR(norm.eval(apply(m, y)), std::abs(lambda) * base, 1e-12 * std::abs(lambda) * base)
          << norm.descriptor();
    }
  }
}

TEST(TruncateColumns, IdentityAndProjection) {
  const auto m = build_matrix(desk(2, 100, 1.0, 2.0));
  EXPECT_EQ(truncate_columns(m, 2), m);
  const auto t = truncate_columns(m, 1);
  EXPECT_TRUE(t.truncated());
  EXPECT_EQ(t.columns(), 1);
  EXPECT_EQ(t.group_count(), m.group_count());
  for (std::size_t g = 0; g < m.group_count(); ++g) {
    EXPECT_EQ(t.direction(g)[0], m.direction(g)[0]);
    EXPECT_EQ(t.multiplicity(g), m.multiplicity(g));
  }
  EXPECT_THROW(truncate_columns(m, 0), DomainError);
  EXPECT_THROW(truncate_columns(m, 3), DomainError);
}

TEST(ReferenceProfile, EntrywiseExample) {
  const auto spec = desk(6, 1000, 2.0, 4.0, 0.1, 0.001);
  const auto prof = reference_profile(spec, 1);
  EXPECT_TRUE(prof.entrywise);
  EXPECT_EQ(prof.exactness(), "entrywise");
  const SphericalMarginal marg(6);
  EXPECT_NEAR(prof.a, marg.Phi(1.5), 1e-15);
  EXPECT_NEAR(prof.a, 0.92809459564419805925, 1e-14);
  EXPECT_NEAR(prof.b, marg.Phi((1 - 17 * 0.001) * std::sqrt(6.0)), 1e-15);
  const auto v = prof.v.expand();
  ASSERT_EQ(v.size(), 1000u);
  EXPECT_NEAR(v[499], -0.0014428688092542395879, 1e-14);
  EXPECT_EQ(v[499], marg.Phi_inv(0.4995));
  EXPECT_EQ(v[999] == std::sqrt(6.0), 999.5 > prof.b * 1000);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LE(v[i - 1], v[i]);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(v[i], -v[v.size() - 1 - i], 1e-10);
}

TEST(ReferenceProfile, EntrywiseMatchesDefinition) {
  for (double delta : {0.001, 0.01, 0.05}) {
    const auto spec = desk(5, 2000, 2.0, 4.0, 0.1, delta);
    const auto prof = reference_profile(spec, 1);
    const SphericalMarginal marg(5);
    const double N = 2000.0, r = std::sqrt(5.0);
    const auto v = prof.v.expand();
    std::uint64_t lo = 0, hi = 0;
    for (std::size_t i = 1; i <= v.size(); ++i) {
      const double h = i - 0.5;
      double expected;
      if (h < (1 - prof.b) * N) expected = -r, ++lo;
      else if (h > prof.b * N) expected = r, ++hi;
      else expected = marg.Phi_inv(h / N);
      EXPECT_EQ(v[i - 1], expected) << i;
    }
    EXPECT_EQ(prof.low_count, lo);
    EXPECT_EQ(prof.high_count, hi);
  }
}

TEST(ReferenceProfile, QuadratureConservesCountsAndIsMonotone) {
  for (std::uint64_t N : {20000001ull, 1000000000ull, 9223372036854775807ull}) {
    const auto spec = desk(6, N, 2.0, 4.0, 0.1, 0.002);
    const auto prof = reference_profile(spec, 4096);
    EXPECT_FALSE(prof.entrywise);
    EXPECT_EQ(prof.v.total(), N);
    EXPECT_GT(prof.bucket_width_bound, 0.0);
    double prev = -INFINITY;
    for (const auto& item : prof.v.items()) {
      EXPECT_GE(item.value, prev);
      prev = item.value;
    }
    EXPECT_EQ(prof.v.items().front().value, -std::sqrt(6.0));
    EXPECT_EQ(prof.v.items().back().value, std::sqrt(6.0));
  }
}

TEST(ScalingConstant, MaxNormIsRootN) {
  const auto prof = reference_profile(desk(6, 100000, 2.0, 4.0, 0.1, 0.002), 1);
  ASSERT_LT(prof.b, 1.0 - 1.0 / (2.0 * 100000));
  EXPECT_EQ(scaling_constant(prof, PermInvariantNorm::linf()), std::sqrt(6.0));
}

TEST(ScalingConstant, SecondMomentMatchesN) {
  const std::uint64_t N = 100000;
  const auto prof = reference_profile(desk(6, N, 2.0, 4.0), 1);
  const double M = scaling_constant(prof, PermInvariantNorm::lp(2));
  const double second_moment = oracle::integrate(
      [](double t) { return t * t * SphericalMarginal(6).phi(t).value; }, -std::sqrt(6.0), std::sqrt(6.0), 256);
  EXPECT_NEAR(second_moment, 1.0, 1e-10);
  EXPECT_NEAR(M * M / (N * second_moment), 1.0, 0.02);
}

TEST(ScalingConstant, SingleRowProfile) {
  // With N = 1 the single entry sits at i - 1/2 = 1/2, inside [(1-b), b] once b >= 1/2.
  const auto prof = reference_profile(desk(6, 1, 2.0, 4.0), 1);
  EXPECT_GE(prof.b, 0.5);
  EXPECT_EQ(prof.v.total(), 1u);
  EXPECT_EQ(scaling_constant(prof, PermInvariantNorm::lp(1)), 0.0);
}

TEST(ScalingConstant, EntrywiseAndQuadratureAgree) {
  const auto spec = desk(6, 1000000, 2.0, 4.0, 0.1, 0.002);
  const auto exact = reference_profile(spec, 1, ProfilePath::entrywise);
  const auto quad = reference_profile(spec, 20000, ProfilePath::quadrature);
  EXPECT_EQ(exact.low_count, quad.low_count);
  EXPECT_EQ(exact.high_count, quad.high_count);
  for (double p : {1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()}) {
    const auto norm = PermInvariantNorm::lp(p);
    const double a = scaling_constant(exact, norm), b = scaling_constant(quad, norm);
    EXPECT_LE(std::abs(a - b) / a, 10.0 * quad.bucket_width_bound) << p;
  }
}

TEST(Validate, RejectsBrokenSpecs) {
  auto s = desk(3, 100, 2.0, 4.0);
  EXPECT_NO_THROW(validate(s));
  auto bad = s;
  bad.N = 0;
  EXPECT_THROW(validate(bad), DomainError);
  bad = s;
  bad.delta = 0.1;
  EXPECT_THROW(validate(bad), DomainError);
  bad = s;
  bad.n = 0;
  EXPECT_THROW(validate(bad), DomainError);
  bad = s;
  bad.epsilon = 1.0;
  EXPECT_THROW(validate(bad), DomainError);
}

}  // namespace
}  // namespace pinembed
