#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oodlab/conditions.hpp"

using namespace oodlab;

namespace {

FeatureSetPtr line(int n) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({static_cast<double>(i)});
  return std::make_shared<const FeatureSet>(pts);
}

Domain atoms(Point a, Point b, double pi_out = 0.5) {
  return Domain(LabelSpace(1), JointDistribution::point_mass(a, 1), JointDistribution::point_mass(b, 2), pi_out);
}

const Loss zo = Loss::zero_one(1);

}  // namespace

TEST_CASE("linear condition") {
  const Domain sep = atoms({0.0}, {1.0});
  const auto r = check_linear(enumerate_space(line(2), 1), sep, 1e-12, zo);
  CHECK(r.holds);
  CHECK(r.max_deviation == 0.0);

  const Domain overlap = atoms({0.0}, {0.0});
  const TableSpace one = enumerate_space(line(1), 1);
  const auto f = check_linear(one, overlap, 1e-12, zo);
  CHECK_FALSE(f.holds);
  CHECK(f.max_deviation == 0.5);
  REQUIRE(f.violating_alpha);
  CHECK(*f.violating_alpha == 0.5);

  CHECK(check_linear(one, overlap, {0.0, 1.0}, 1e-12, zo).holds);

  // A kink off the default grid is still caught.
  const Domain skew(LabelSpace(1), JointDistribution::point_mass({0.0}, 1), JointDistribution::point_mass({0.0}, 2), 0.5);
  const Loss asym({{0, 1}, {0.3, 0}});
  const auto k = check_linear(one, skew, 1e-12, asym);
  CHECK_FALSE(k.holds);
  // Both curves 0.3 (1-a) and a meet at a = 0.3 / 1.3.
  CHECK(std::abs(*k.violating_alpha - 0.3 / 1.3) <= 1e-12);
  CHECK(std::abs(k.max_deviation - 0.3 / 1.3) <= 1e-12);
}

TEST_CASE("envelope kinks") {
  CHECK(envelope_kinks({{0, 1}, {1, 0}}) == std::vector<double>{0.5});
  CHECK(envelope_kinks({{0, 0}, {1, 1}}).empty());
  // Three lines: kinks where the middle line takes over and hands back.
  const auto k = envelope_kinks({{0, 1}, {0.2, 0.2}, {1, 0}});
  REQUIRE(k.size() == 2);
  CHECK(k[0] == doctest::Approx(0.2));
  CHECK(k[1] == doctest::Approx(0.8));
}

TEST_CASE("eps intersection") {
  const Domain sep = atoms({0.0}, {1.0});
  const TableSpace two = enumerate_space(line(2), 1);
  for (double eps : {1.0, 0.1, 1e-6}) {
    const auto r = check_eps_intersection(two, sep, eps, zo);
    CHECK(r.holds);
    REQUIRE(r.witness);
    CHECK(r.witness->assignment() == std::vector<Label>{1, 2});
  }
  const Domain overlap = atoms({0.0}, {0.0});
  const TableSpace one = enumerate_space(line(1), 1);
  CHECK_FALSE(check_eps_intersection(one, overlap, 0.1, zo).holds);
  CHECK(check_eps_intersection(one, overlap, zo.bound(), zo).holds);
  CHECK_FALSE(check_eps_intersection_grid(one, overlap, default_eps_grid(), zo).holds);
  CHECK_THROWS_AS(check_eps_intersection(one, overlap, 0.0, zo), ArgumentError);
}

TEST_CASE("compatibility") {
  const TableSpace three = enumerate_space(line(3), 1);
  const Domain b = atoms({0.0}, {1.0});
  const Domain c = atoms({0.0}, {2.0});
  for (double eps : {0.5, 0.1, 0.01}) CHECK(check_compatibility(three, {b}, eps, zo).holds ==
                                            check_eps_intersection(three, b, eps, zo).holds);
  const auto r = check_compatibility(three, {b, c}, 0.1, zo);
  CHECK(r.holds);
  REQUIRE(r.witness);
  CHECK(r.witness->assignment() == std::vector<Label>{1, 2, 2});

  const Domain on_id = atoms({0.0}, {0.0});
  for (double eps : {0.2, 0.1, 0.01}) CHECK_FALSE(check_compatibility(three, {b, on_id}, eps, zo).holds);

  const Domain other_id(LabelSpace(1), JointDistribution::point_mass({1.0}, 1), JointDistribution::point_mass({2.0}, 2), 0.5);
  CHECK_THROWS_AS(check_compatibility(three, {b, other_id}, 0.1, zo), ArgumentError);
}

TEST_CASE("condition 3 on loss tables") {
  for (int k = 1; k <= 4; ++k) CHECK(check_condition3(Loss::zero_one(k), k));
  CHECK_FALSE(check_condition3(Loss({{0, 1, 1}, {1, 0, 1}, {0.5, 1, 0}}), 2));
  CHECK(check_condition3(Loss({{0, 7}, {0.1, 0}}), 1));
}

TEST_CASE("realizability") {
  const Domain sep = atoms({0.0}, {1.0});
  const auto r = check_realizability(enumerate_space(line(2), 1), sep, zo);
  CHECK(r.holds);
  REQUIRE(r.witness);
  CHECK(r.witness->assignment() == std::vector<Label>{1, 2});

  CHECK_FALSE(check_realizability(enumerate_space(line(1), 1), atoms({0.0}, {0.0}), zo).holds);

  const auto f = line(2);
  const TableSpace only_out = TableSpace::of(f, 1, {{2, 2}});
  const Domain pure_ood = atoms({0.0}, {1.0}, 1.0);
  CHECK(check_realizability(only_out, pure_ood, zo).holds);
}

TEST_CASE("argmin decomposition") {
  const auto f = line(3);
  const TableSpace all = enumerate_space(f, 1);
  const JointDistribution base = JointDistribution::point_mass({0.0}, 1);
  const OodDecomposition good(LabelSpace(1), base,
                              {JointDistribution::point_mass({1.0}, 2), JointDistribution::point_mass({2.0}, 2)},
                              {0.2, 0.3});
  CHECK(check_argmin_decomposition(all, good, zo));

  const OodDecomposition bad(LabelSpace(1), base,
                             {JointDistribution::point_mass({0.0}, 2), JointDistribution::point_mass({2.0}, 2)},
                             {0.2, 0.3});
  CHECK_FALSE(check_argmin_decomposition(all, bad, zo));

  // Every member labels point 2 as OOD, and the single component sits there.
  const TableSpace fixed = TableSpace::of(f, 1, {{1, 1, 2}, {1, 2, 2}, {2, 1, 2}});
  const OodDecomposition single(LabelSpace(1), base, {JointDistribution::point_mass({2.0}, 2)}, {0.4});
  CHECK(check_argmin_decomposition(fixed, single, zo));
}

TEST_CASE("overlap lower bound") {
  const TableSpace one = enumerate_space(line(1), 1);
  const Domain overlap = atoms({0.0}, {0.0});
  CHECK(overlap_lower_bound(overlap, 0.5, zo) == doctest::Approx(0.5));
  CHECK(inf_risk(one, overlap, 0.5, zo).value == 0.5);
  CHECK(overlap_lower_bound(atoms({0.0}, {1.0}), 0.5, zo) == 0.0);
  CHECK_THROWS_AS(overlap_lower_bound(overlap, 0.0, zo), ArgumentError);
  CHECK_THROWS_AS(overlap_lower_bound(overlap, 1.0, zo), ArgumentError);

  // Three atoms, one shared with masses (0.2, 0.3).
  const Domain shared(LabelSpace(1),
                      JointDistribution(DiscreteDistribution({{{0.0}, 0.2}, {{1.0}, 0.8}}), {1, 1}),
                      JointDistribution(DiscreteDistribution({{{0.0}, 0.3}, {{2.0}, 0.7}}), {2, 2}), 0.5);
  const TableSpace all = enumerate_space(line(3), 1);
  for (double a : uniform_alpha_grid()) {
    if (a == 0.0 || a == 1.0) continue;
    CHECK(overlap_lower_bound(shared, a, zo) <= inf_risk(all, shared, a, zo).value + 1e-15);
  }
  CHECK(overlap_constant(zo, 0.3) == doctest::Approx(0.3));
}
