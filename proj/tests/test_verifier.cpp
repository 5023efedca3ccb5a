#include <doctest.h>

#include <array>
#include <cmath>

#include "psiest/catalog.hpp"
#include "psiest/errors.hpp"
#include "psiest/random.hpp"
#include "psiest/verifier.hpp"

using namespace psiest;

namespace {

Estimator normal() { return Estimator::from_psi(make_psi(normal_location(1.0))); }
Estimator alpha() { return Estimator::from_psi(make_psi(alpha_density())); }
Estimator sign() { return Estimator::from_psi(make_psi(sign_location())); }
Estimator kappa_est() { return Estimator::from_reference({ReferenceKind::Kappa}); }

// g(s) = (s − ½)² along the normal-location weight line s ↦ (1−s, s) on (0, 1):
// not monotone.
Estimator bowl() {
  return Estimator::from_composite(
      CompositeEstimator({make_psi(normal_location(1.0))}, "(t1 - 0.5)^2", ParameterDomain::real_line()));
}

void check_replays(const Estimator& est, const PropertyReport& r) {
  REQUIRE(r.status == PropertyStatus::Violated);
  REQUIRE(r.witness.has_value());
  const auto again = replay(est, r);
  CHECK(again.status == PropertyStatus::Violated);
  REQUIRE(again.witness.has_value());
  CHECK(std::fabs(again.witness->margin - r.witness->margin) <= 1e-12);
}

}  // namespace

TEST_CASE("mean-type examples") {
  const auto r = check_mean_type(normal(), {{1, 81}, {25, 25}});
  CHECK(r.status == PropertyStatus::Holds);
  CHECK(r.property == PropertyKind::MeanTypeStrict);

  const auto k = check_mean_type(kappa_est(), {{1, 81}, {25, 25}});
  CHECK(k.status == PropertyStatus::Violated);
  CHECK(k.property == PropertyKind::MeanType);
  REQUIRE(k.witness);
  CHECK(std::fabs(k.witness->margin - 1) <= 1e-12);
  CHECK(std::fabs(k.witness->value("concatenated") - 24) <= 1e-12);
  check_replays(kappa_est(), k);

  CHECK(check_mean_type(normal(), {{3, 4, 5}}).status == PropertyStatus::Holds);
  CHECK(check_mean_type(normal(), {{2, 2}, {2}}).property == PropertyKind::MeanType);
  CHECK_THROWS_AS(check_mean_type(normal(), {{1}, {}}), DomainError);
  CHECK_THROWS_AS(check_mean_type(normal(), {}), DomainError);

  // even-length sign samples have no estimate
  const auto s = check_mean_type(sign(), {{1, 2}, {3}});
  CHECK(s.status == PropertyStatus::Inconclusive);
  CHECK(s.cause.find("not unique") != std::string::npos);
}

TEST_CASE("weight line domains") {
  const std::array<double, 2> a1{-1, 1};
  const std::array<double, 2> b1{1, 0};
  CHECK(weight_line_domain(a1, b1) == Interval::closed(0, 1));

  const std::array<double, 2> zero{0, 0};
  const std::array<double, 2> neg{-1, -1};
  CHECK(weight_line_domain(zero, neg).empty());
  CHECK(weight_line_domain(zero, zero).empty());

  const std::array<double, 1> one{1};
  const std::array<double, 1> z1{0};
  const auto j = weight_line_domain(one, z1);
  CHECK(j == Interval(0, kInf, false, false));

  const std::array<double, 2> ones{1, 1};
  CHECK(weight_line_domain(ones, neg) == Interval(1, kInf, false, false));
  const std::array<double, 2> b2{-1, -2};
  CHECK(weight_line_domain(ones, b2) == Interval(2, kInf, true, false));
  const std::array<double, 2> b3{1, 1};
  CHECK(weight_line_domain(zero, b3) == Interval::real_line());
  // rounding must not hide a common root: 0.401·s + 0.121 has root -0.121/0.401
  const std::array<double, 1> a4{0.40115630026615423};
  const std::array<double, 1> b4{0.12086911933339206};
  CHECK_FALSE(weight_line_domain(a4, b4).lo_closed());

  CHECK_THROWS_AS(weight_line_domain(std::array<double, 1>{1}, ones), DomainError);

  const auto range = weight_line_sampling_range(j);
  CHECK(range.lo() == doctest::Approx(1e-4));
  CHECK(range.hi() == doctest::Approx(100 - 1e-4));
  CHECK(weight_line_sampling_range(Interval::closed(0, 1)) == Interval::closed(0, 1));
}

TEST_CASE("weight-line monotonicity") {
  const std::array<double, 2> xs{0, 1};
  const std::array<double, 2> a{-1, 1};
  const std::array<double, 2> b{1, 0};
  CHECK(check_weight_line_monotone(normal(), xs, a, b, 11).status == PropertyStatus::Holds);

  // λ = ½ is not on an even grid over [0, 1]
  const std::array<double, 2> xs15{1, 5};
  CHECK(check_weight_line_monotone(sign(), xs15, a, b, 10).status == PropertyStatus::Holds);
  CHECK(check_weight_line_monotone(sign(), xs15, a, b, 11).status == PropertyStatus::Inconclusive);

  const std::array<double, 2> flat{0, 0};
  const std::array<double, 2> ones{1, 1};
  CHECK(check_weight_line_monotone(normal(), xs, flat, ones).status == PropertyStatus::Holds);

  const auto bad = check_weight_line_monotone(bowl(), xs, a, b, 33);
  CHECK(bad.status == PropertyStatus::Violated);
  check_replays(bowl(), bad);

  CHECK_THROWS_AS(check_weight_line_monotone(normal(), xs, a, b, 2), DomainError);
  const std::array<double, 2> neg{-1, -1};
  CHECK_THROWS_AS(check_weight_line_monotone(normal(), xs, flat, neg), DomainError);
}

TEST_CASE("up-down pattern and sampled quasi-affinity") {
  const std::vector<double> up{1, 2, 2, 3, 7};
  const std::vector<double> down{5, 4, 4, 4, 0};
  const std::vector<double> bump{0, 1, 3, 2};
  const std::vector<double> dip{3, 1, 2};
  CHECK_FALSE(find_up_down_pattern(up, 0).has_value());
  CHECK_FALSE(find_up_down_pattern(down, 0).has_value());
  const auto p = find_up_down_pattern(bump, 0);
  REQUIRE(p);
  CHECK(p->j == 2);
  CHECK(p->margin == 1);
  CHECK(find_up_down_pattern(dip, 0).has_value());
  CHECK_FALSE(find_up_down_pattern(dip, 1.5).has_value());
  CHECK(sampled_quasi_affine(up, 0));
  CHECK_FALSE(sampled_quasi_affine(bump, 0));

  Rng rng(8);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> v(static_cast<std::size_t>(rng.integer(0, 12)));
    for (auto& x : v) x = rng.integer(0, 4);  // many ties
    const double tol = rng.integer(0, 1) ? 0.0 : 1.0;
    CHECK(find_up_down_pattern(v, tol).has_value() == !sampled_quasi_affine(v, tol));
    CHECK(check_quasi_affine_monotone(v, tol).status == PropertyStatus::Holds);
  }
}

TEST_CASE("bisymmetry examples") {
  const Matrix x{{0, 1}, {1, 0}};
  const Matrix ones{{1, 1}, {1, 1}};
  CHECK(check_bisymmetry(normal(), x, ones).status == PropertyStatus::Holds);

  const Matrix kx{{1, 81}, {81, 1}, {25, 25}, {25, 25}};
  const Matrix kw(4, std::vector<double>(2, 1.0));
  const auto r = check_bisymmetry(kappa_est(), kx, kw);
  CHECK(r.status == PropertyStatus::Violated);
  REQUIRE(r.witness);
  CHECK(std::fabs(r.witness->value("min_row") - 25) <= 1e-12);
  CHECK(std::fabs(r.witness->value("max_col") - 24) <= 1e-12);
  check_replays(kappa_est(), r);

  const Matrix zero_row{{0, 0}, {1, 1}};
  const Matrix zero_col{{0, 1}, {0, 1}};
  CHECK_THROWS_AS(check_bisymmetry(normal(), x, zero_row), PositivityViolation);
  CHECK_THROWS_AS(check_bisymmetry(normal(), x, zero_col), PositivityViolation);
  CHECK_THROWS_AS(check_bisymmetry(normal(), {{1, 2}, {3}}, ones), DomainError);

  CHECK(check_bisymmetry_2x2(normal(), 0, 1, 1, 0, 1, 1, 1, 1).status == PropertyStatus::Holds);
  CHECK_THROWS_AS(check_bisymmetry_2x2(normal(), 0, 1, 1, 0, 1, 0, 1, 0), PositivityViolation);
  CHECK(check_bisymmetry_2x2(alpha(), 0.2, 0.7, 0.5, 0.9, 1, 2, 3, 4).status == PropertyStatus::Holds);
}

TEST_CASE("replication limit") {
  const std::array<double, 1> y{0};
  const std::array<double, 1> z{1};
  const auto sched = doubling_schedule(10);
  const auto r = check_replication_limit(normal(), y, z, sched);
  REQUIRE(r.errors.size() == 11);
  for (std::size_t i = 0; i < sched.size(); ++i) {
    CHECK(std::fabs(r.errors[i] - 1.0 / (static_cast<double>(sched[i]) + 1)) <= 1e-12);
  }
  CHECK(r.report.status == PropertyStatus::Violated);  // 1/1025 is still far from 0
  check_replays(normal(), r.report);

  const auto long_run = check_replication_limit(normal(), y, z, doubling_schedule(30));
  CHECK(long_run.report.status == PropertyStatus::Holds);

  const std::array<double, 2> same{0.3, 0.6};
  const auto eq = check_replication_limit(alpha(), same, same, doubling_schedule(5));
  for (double e : eq.errors) CHECK(e <= 1e-12);

  const std::array<std::uint64_t, 2> bad{4, 2};
  CHECK_THROWS_AS(check_replication_limit(normal(), y, z, bad), DomainError);
}

TEST_CASE("weight continuity") {
  const std::array<double, 2> xs{0, 1};
  const std::array<double, 2> l0{1, 1};
  const auto r = check_weight_continuity(normal(), xs, l0);
  CHECK(r.status == PropertyStatus::Holds);

  const std::array<double, 2> edge{1, 0};
  CHECK(check_weight_continuity(normal(), xs, edge).status == PropertyStatus::Holds);

  const std::array<double, 3> ax{0.2, 0.5, 0.8};
  const std::array<double, 3> al{0.7, 1.3, 2};
  CHECK(check_weight_continuity(alpha(), ax, al).status == PropertyStatus::Holds);

  // a jump in g never shrinks the deviation
  const auto jump = Estimator::from_composite(
      CompositeEstimator({make_psi(normal_location(1.0))}, "sign(t1 - 0.5)", ParameterDomain::real_line()));
  const auto j = check_weight_continuity(jump, xs, l0);
  CHECK(j.status == PropertyStatus::Inconclusive);

  const std::array<double, 2> xs15{1, 5};
  CHECK(check_weight_continuity(sign(), xs15, l0).status == PropertyStatus::Inconclusive);

  ContinuityOptions huge;
  huge.radius = 100;
  huge.probes = 64;
  const std::array<double, 2> small{1e-3, 1e-3};
  CHECK_THROWS_AS(check_weight_continuity(normal(), xs, small, huge), InvalidProbe);
}

TEST_CASE("sensitivity") {
  const auto r = find_sensitivity_witness(normal(), {0, 1, 0.3, 0.4, 512});
  REQUIRE(r.found);
  CHECK(r.k == 2);
  CHECK(r.m == 1);
  CHECK(std::fabs(r.value - 1.0 / 3) <= 1e-12);

  const auto mx = Estimator::from_reference({ReferenceKind::Max});
  CHECK_FALSE(find_sensitivity_witness(mx, {0, 1, 0.3, 0.4, 512}).found);
  const auto mid = Estimator::from_reference({ReferenceKind::MidRange});
  CHECK_FALSE(find_sensitivity_witness(mid, {0, 1, 0.6, 0.7, 512}).found);
  const auto rep = check_sensitivity(mid, {0, 1, 0.6, 0.7, 64});
  CHECK(rep.status == PropertyStatus::Violated);
  check_replays(mid, rep);

  CHECK_THROWS_AS(find_sensitivity_witness(normal(), {0, 1, 0.4, 0.3, 64}), DomainError);
  CHECK_THROWS_AS(find_sensitivity_witness(normal(), {0, 1, -0.1, 0.3, 64}), DomainError);

  const auto comp = Estimator::from_composite(CompositeEstimator(
      {make_psi(normal_location(1.0)), make_psi(normal_location(2.0))}, "(t1 + t2)/2", ParameterDomain::real_line()));
  CHECK(find_sensitivity_witness(comp, {0, 1, 0.3, 0.4, 512}).found);
}

TEST_CASE("sensitivity witness is minimal against a full scan") {
  Rng rng(21);
  for (const auto& est : {normal(), alpha(), Estimator::from_psi(make_psi(sqrt_mean()))}) {
    const auto box = est.observation_domain().sampling_box();
    for (int trial = 0; trial < 40; ++trial) {
      double x = rng.uniform(box.lo(), box.hi());
      double y = rng.uniform(box.lo(), box.hi());
      if (est.single(x) > est.single(y)) std::swap(x, y);
      const double mx = est.single(x);
      const double my = est.single(y);
      double u = mx + (my - mx) * rng.uniform(0.01, 0.9);
      double v = u + (my - u) * rng.uniform(0.01, 0.5);
      if (!(mx < u && u < v && v < my)) continue;
      const std::size_t bound = 64;
      // independent oracle: every (k, m) with k + m ≤ bound, minimal total
      std::size_t best = 0;
      for (std::size_t k = 1; k < bound; ++k) {
        for (std::size_t m = 1; k + m <= bound; ++m) {
          const std::array<double, 2> xs{x, y};
          const std::array<double, 2> w{double(k), double(m)};
          const double val = est.weighted(xs, w);
          if (u < val && val < v && (best == 0 || k + m < best)) best = k + m;
        }
      }
      const auto got = find_sensitivity_witness(est, {x, y, u, v, bound});
      CHECK(got.found == (best != 0));
      if (got.found) CHECK(got.k + got.m == best);
    }
  }
}

TEST_CASE("structural invariants") {
  const WeightedSample s({{1, 2}, {3, 0.5}, {8, 1}});
  CHECK(check_null_homogeneity(normal(), s, 7.5).status == PropertyStatus::Holds);
  const std::array<double, 4> xs{4, 1, 9, 2};
  const std::array<std::size_t, 4> perm{2, 0, 3, 1};
  CHECK(check_permutation_invariance(normal(), xs, perm).status == PropertyStatus::Holds);
  CHECK(check_permutation_invariance(sign(), xs, perm).status == PropertyStatus::Holds);  // both fail alike
  const std::array<std::size_t, 4> notperm{0, 0, 1, 2};
  CHECK_THROWS_AS(check_permutation_invariance(normal(), xs, notperm), DomainError);

  const std::array<std::size_t, 4> counts{3, 0, 2, 5};
  CHECK(check_replication_collapse(normal(), xs, counts).status == PropertyStatus::Holds);
  CHECK(check_replication_collapse(sign(), xs, counts).status == PropertyStatus::Holds);
  CHECK_THROWS_AS(check_replication_collapse(kappa_est(), xs, counts), DomainError);

  CHECK(check_sign_change_certificate(normal(), s).status == PropertyStatus::Holds);
  CHECK(check_sign_change_certificate(sign(), WeightedSample({{1, 1}, {5, 2}})).status == PropertyStatus::Holds);
}

TEST_CASE("property names") {
  CHECK(property_from_string("mean-type") == PropertyKind::MeanType);
  CHECK(property_from_string("Bisymmetry2x2") == PropertyKind::Bisymmetry2x2);
  CHECK(property_from_string("bisymmetry-2x2") == PropertyKind::Bisymmetry2x2);
  CHECK_FALSE(property_from_string("nope").has_value());
  CHECK(to_string(PropertyStatus::Inconclusive) == "Inconclusive");
}
