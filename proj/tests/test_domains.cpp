#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oodlab/domains.hpp"

using namespace oodlab;

namespace {

JointDistribution atoms(std::vector<Atom> a, std::vector<Label> y) {
  return JointDistribution(DiscreteDistribution(std::move(a)), std::move(y));
}

// Independent integration: split the plane by every rectangle edge and sum
// density * area over the resulting cells.
double integrate_mixed(const Domain& d) {
  std::set<double> xs, ys;
  for (const auto* j : {&d.id(), &d.ood()})
    for (const auto& c : j->rects().components()) {
      xs.insert(c.rect.lo[0]);
      xs.insert(c.rect.hi[0]);
      ys.insert(c.rect.lo[1]);
      ys.insert(c.rect.hi[1]);
    }
  const std::vector<double> vx(xs.begin(), xs.end()), vy(ys.begin(), ys.end());
  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < vx.size(); ++i)
    for (std::size_t j = 0; j + 1 < vy.size(); ++j) {
      const Point c{0.5 * (vx[i] + vx[i + 1]), 0.5 * (vy[j] + vy[j + 1])};
      total += static_cast<long double>(d.mixed_density(c)) * (vx[i + 1] - vx[i]) * (vy[j + 1] - vy[j]);
    }
  return static_cast<double>(total);
}

}  // namespace

TEST_CASE("label space houses k+1 as the OOD label") {
  LabelSpace ls(3);
  CHECK(ls.ood() == 4);
  CHECK(ls.size() == 4);
  CHECK(ls.is_id(3));
  CHECK_FALSE(ls.is_id(4));
  CHECK_THROWS_AS(LabelSpace(0), ArgumentError);
}

TEST_CASE("discrete distributions validate masses and points") {
  CHECK_THROWS_AS(DiscreteDistribution(std::vector<Atom>{}), ArgumentError);
  CHECK_THROWS_AS(DiscreteDistribution({{{0.0}, 0.5}, {{1.0}, 0.4}}), ArgumentError);
  CHECK_THROWS_AS(DiscreteDistribution({{{0.0}, 0.5}, {{0.0}, 0.5}}), ArgumentError);
  CHECK_THROWS_AS(DiscreteDistribution({{{0.0}, 1.5}, {{1.0}, -0.5}}), ArgumentError);
  CHECK_NOTHROW(DiscreteDistribution({{{0.0}, 0.25}, {{1.0}, 0.75}}));
}

TEST_CASE("rectangle mixtures reject degenerate boxes") {
  CHECK_THROWS_AS(UniformRectMixture({{Rect{{0, 0}, {0, 1}}, 1.0}}), ArgumentError);
  CHECK_THROWS_AS(UniformRectMixture({{Rect{{0, 0}, {1, 1}}, 0.5}}), ArgumentError);
  UniformRectMixture m({{Rect{{0, 0}, {2, 1}}, 1.0}});
  CHECK(m.density(Point{1.0, 0.5}) == doctest::Approx(0.5));
  CHECK(m.density(Point{3.0, 0.5}) == 0.0);
}

TEST_CASE("domains validate label placement") {
  LabelSpace ls(1);
  CHECK_THROWS_AS(Domain(ls, JointDistribution::point_mass({0.0}, 2), JointDistribution::point_mass({1.0}, 2)),
                  ArgumentError);
  CHECK_THROWS_AS(Domain(ls, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({1.0}, 1)),
                  ArgumentError);
  CHECK_THROWS_AS(
      Domain(ls, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({1.0}, 2), -0.1),
      ArgumentError);
}

TEST_CASE("mix_alpha endpoints and identity") {
  LabelSpace ls(1);
  Domain d(ls, atoms({{{0.0}, 0.5}, {{1.0}, 0.5}}, {1, 1}), atoms({{{1.0}, 0.25}, {{2.0}, 0.75}}, {2, 2}), 0.3);

  const Domain d0 = mix_alpha(d, 0.0);
  CHECK(d0.pi_out() == 0.0);
  for (double x : {0.0, 1.0, 2.0}) CHECK(d0.mixed_density(Point{x}) == (x < 1.5 ? 0.5 : 0.0));

  const Domain same = mix_alpha(d, d.pi_out());
  for (double x : {0.0, 1.0, 2.0}) CHECK(same.mixed_density(Point{x}) == d.mixed_density(Point{x}));
  CHECK(same.id() == d.id());
  CHECK(same.ood() == d.ood());

  CHECK_THROWS_AS(mix_alpha(d, 1.5), ArgumentError);
  CHECK_THROWS_AS(mix_alpha(d, -0.1), ArgumentError);

  // Discrete mass is preserved exactly at every grid alpha.
  for (int i = 0; i <= 100; ++i) {
    const double a = i / 100.0;
    const Domain m = mix_alpha(d, a);
    double total = 0.0;
    for (double x : {0.0, 1.0, 2.0}) total += m.mixed_density(Point{x});
    CHECK(std::abs(total - 1.0) <= 1e-15);
  }
}

TEST_CASE("benchmark mixture integrates to one") {
  for (double gap : {100.0, -2.0}) {
    const Domain d = mix_alpha(make_benchmark_domain(20, gap), 0.5);
    CHECK(std::abs(integrate_mixed(d) - 1.0) <= 1e-10);
  }
}

TEST_CASE("benchmark geometry") {
  CHECK(benchmark_class_offset(20, 1) == 1.0);
  CHECK(benchmark_class_offset(20, 10) == 217.0);
  for (int c = 1; c <= 10; ++c) CHECK(benchmark_class_offset(20, c) == 5.0 + 20.0 * (c - 1) + 4.0 * (c - 2));

  const Domain d = make_benchmark_domain(20, -2);
  CHECK(d.k() == 10);
  CHECK(d.pi_out() == 0.0);
  const auto& ood = d.ood().rects().components();
  REQUIRE(ood.size() == 1);
  CHECK(ood[0].rect.lo == std::vector<double>{0.0, 3.0});
  CHECK(ood[0].rect.hi == std::vector<double>{222.0, 8.0});
  const auto& id = d.id().rects().components();
  REQUIRE(id.size() == 10);
  for (std::size_t i = 0; i < id.size(); ++i) {
    CHECK(d.id().labels()[i] == static_cast<Label>(i + 1));
    CHECK(id[i].weight == doctest::Approx(0.1));
    CHECK(id[i].rect.lo[1] == 1.0);
    CHECK(id[i].rect.hi[1] == 5.0);
    for (std::size_t j = i + 1; j < id.size(); ++j) CHECK(id[i].rect.hi[0] < id[j].rect.lo[0]);
  }
  // ID geometry does not depend on gap_io.
  CHECK(make_benchmark_domain(20, 100).id() == d.id());
  CHECK_THROWS_AS(make_benchmark_domain(-5, 100), ConstructionError);
}

TEST_CASE("overlap measure") {
  LabelSpace ls(1);
  CHECK(overlap_measure(Domain(ls, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({0.0}, 2))) == 1.0);
  CHECK(overlap_measure(make_benchmark_domain(20, 100)) == 0.0);
  CHECK(overlap_measure(make_benchmark_domain(20, -2)) == doctest::Approx(80.0).epsilon(1e-12));

  const JointDistribution rect(UniformRectMixture({{Rect{{0.0}, {1.0}}, 1.0}}), {2});
  CHECK_THROWS_AS(overlap_measure(Domain(ls, JointDistribution::point_mass({0.0}, 1), rect)), UnsupportedError);
}

TEST_CASE("support distance") {
  LabelSpace ls(1);
  CHECK(support_distance(Domain(ls, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({3.0}, 2))) == 3.0);
  const JointDistribution a(UniformRectMixture({{Rect{{0, 0}, {2, 2}}, 1.0}}), {1});
  const JointDistribution b(UniformRectMixture({{Rect{{1, 1}, {3, 3}}, 1.0}}), {2});
  CHECK(support_distance(Domain(ls, a, b)) == 0.0);
  CHECK(support_distance(make_benchmark_domain(20, 100)) == 100.0);

  // Positive overlap forces zero distance.
  for (double gap : {-2.0, -1.0, -4.0}) {
    const Domain d = make_benchmark_domain(20, gap);
    CHECK(overlap_measure(d) > 0.0);
    CHECK(support_distance(d) == 0.0);
  }
}

TEST_CASE("sampling") {
  const JointDistribution pm = JointDistribution::point_mass({2.0, 3.0}, 1);
  CHECK(sample(pm, 0, 1).empty());
  const auto five = sample(pm, 5, 9);
  REQUIRE(five.size() == 5);
  for (const auto& p : five) CHECK(p == LabeledPoint{{2.0, 3.0}, 1});

  const Domain d = make_benchmark_domain(20, 100);
  const auto s = sample(d.id(), 10000, 42);
  CHECK(s == sample(d.id(), 10000, 42));
  std::vector<int> counts(11, 0);
  for (const auto& p : s) {
    counts[p.y]++;
    const auto& r = d.id().rects().components()[p.y - 1].rect;
    CHECK(r.contains(p.x));
  }
  const double sd = std::sqrt(10000 * 0.1 * 0.9);
  for (int c = 1; c <= 10; ++c) CHECK(std::abs(counts[c] - 1000.0) <= 4.0 * sd);

  // Smaller samples with the same seed are prefixes.
  const auto head = sample(d.id(), 300, 42);
  CHECK(std::equal(head.begin(), head.end(), s.begin()));
}

TEST_CASE("density-bounded spaces") {
  LabelSpace ls(1);
  DensitySpaceSpec spec;
  spec.discrete_measure = DiscreteDistribution({{{0.0}, 0.5}, {{1.0}, 0.5}});
  spec.bound_b = 2.0;
  const Domain ok(ls, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({1.0}, 2));
  CHECK(satisfies_density_bound(ok, spec));
  const Domain lumped(ls, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({0.0}, 2));
  CHECK_FALSE(satisfies_density_bound(lumped, spec));  // nothing on atom 1.0
  const Domain outside(ls, JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({5.0}, 2));
  CHECK_FALSE(satisfies_density_bound(outside, spec));

  const auto u = sample_base_measure(spec, 2000, 3);
  REQUIRE(u.size() == 2000);
  const auto zeros = std::count(u.begin(), u.end(), Point{0.0});
  CHECK(std::abs(zeros - 1000.0) <= 4.0 * std::sqrt(500.0));

  DensitySpaceSpec leb;
  leb.base = DensitySpaceSpec::Base::lebesgue;
  leb.lebesgue_support = {Rect{{0.0}, {2.0}}};
  leb.bound_b = 2.0;
  const JointDistribution left(UniformRectMixture({{Rect{{0.0}, {1.0}}, 1.0}}), {1});
  const JointDistribution right(UniformRectMixture({{Rect{{1.0}, {2.0}}, 1.0}}), {2});
  CHECK(satisfies_density_bound(Domain(ls, left, right), leb));
  const JointDistribution narrow(UniformRectMixture({{Rect{{1.0}, {1.1}}, 1.0}}), {2});
  CHECK_FALSE(satisfies_density_bound(Domain(ls, left, narrow), leb));
}

TEST_CASE("OOD convex decomposition") {
  LabelSpace ls(1);
  const OodDecomposition dec(ls, JointDistribution::point_mass({0.0}, 1),
                             {JointDistribution::point_mass({1.0}, 2), JointDistribution::point_mass({2.0}, 2)},
                             {0.25, 0.25});
  const Domain d = dec.domain();
  CHECK(d.pi_out() == 0.5);
  CHECK(d.mixed_density(Point{0.0}) == 0.5);
  CHECK(d.mixed_density(Point{1.0}) == 0.25);
  CHECK(d.mixed_density(Point{2.0}) == 0.25);

  CHECK_THROWS_AS(OodDecomposition(ls, JointDistribution::point_mass({0.0}, 1),
                                   {JointDistribution::point_mass({1.0}, 2)}, {1.0}),
                  ArgumentError);
  CHECK_THROWS_AS(OodDecomposition(ls, JointDistribution::point_mass({0.0}, 1),
                                   {JointDistribution::point_mass({1.0}, 1)}, {0.5}),
                  ArgumentError);
}
