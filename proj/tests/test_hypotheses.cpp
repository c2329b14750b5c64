#include <doctest.h>

#include <cmath>
#include <set>

#include "oodlab/hypotheses.hpp"

using namespace oodlab;

namespace {

double score_of(std::vector<double> f, ScoreKind k) { return score(std::span<const double>(f), k); }
Label argmax(std::vector<double> f) { return induced_label(std::span<const double>(f)); }

FeatureSetPtr line_features(int n) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({static_cast<double>(i)});
  return std::make_shared<const FeatureSet>(pts);
}

}  // namespace

TEST_CASE("fcnn forward with zero weights returns the last bias") {
  FcnnArchitecture arch{{3, 4, 5, 2}, Activation::relu};
  Eigen::VectorXd e(2);
  e << 0.0, 1.0;
  const FcnnParams p = constant_output_params(arch, e);
  for (double v : {-3.0, 0.0, 7.5}) {
    const std::vector<double> x{v, 2 * v, -v};
    CHECK(fcnn_forward(arch, p, x) == e);
  }
}

TEST_CASE("relu kills negative preactivations") {
  FcnnArchitecture arch{{1, 2, 1}, Activation::relu};
  FcnnParams p = FcnnParams::zeros(arch);
  p.weights[0] << 1.0, 1.0;
  p.biases[0] << -100.0, -100.0;
  p.weights[1] << 3.0, 4.0;
  p.biases[1] << 0.25;
  for (double v : {-5.0, 0.0, 50.0}) CHECK(fcnn_forward(arch, p, std::vector<double>{v})(0) == 0.25);
}

TEST_CASE("2-2-2 relu net agrees with a hand evaluation") {
  FcnnArchitecture arch{{2, 2, 2}, Activation::relu};
  FcnnParams p = FcnnParams::zeros(arch);
  p.weights[0] << 0.5, -1.0, 2.0, 0.25;
  p.biases[0] << 0.1, -0.3;
  p.weights[1] << 1.5, -0.5, -2.0, 1.0;
  p.biases[1] << 0.2, 0.7;
  const double inputs[5][2] = {{0.3, -1.2}, {1.0, 1.0}, {-2.0, 0.5}, {0.0, 0.0}, {4.2, -3.3}};
  for (const auto& in : inputs) {
    const double x0 = in[0], x1 = in[1];
    const double h0 = std::max(0.0, 0.5 * x0 - 1.0 * x1 + 0.1);
    const double h1 = std::max(0.0, 2.0 * x0 + 0.25 * x1 - 0.3);
    const double o0 = 1.5 * h0 - 0.5 * h1 + 0.2;
    const double o1 = -2.0 * h0 + 1.0 * h1 + 0.7;
    const Eigen::VectorXd out = fcnn_forward(arch, p, std::vector<double>{x0, x1});
    CHECK(std::abs(out(0) - o0) <= 1e-12);
    CHECK(std::abs(out(1) - o1) <= 1e-12);
  }
  // Batch and single-point passes agree.
  Eigen::MatrixXd batch(5, 2);
  for (int i = 0; i < 5; ++i) batch.row(i) << inputs[i][0], inputs[i][1];
  const Eigen::MatrixXd b = fcnn_forward_batch(arch, p, batch);
  for (int i = 0; i < 5; ++i) {
    const Eigen::VectorXd s = fcnn_forward(arch, p, std::vector<double>{inputs[i][0], inputs[i][1]});
    CHECK((b.row(i).transpose() - s).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("fcnn shape checks") {
  CHECK_THROWS_AS(FcnnArchitecture({{2, 3}, Activation::relu}).validate(), ArgumentError);
  FcnnArchitecture arch{{2, 3, 1}, Activation::sigmoid};
  const FcnnParams p = FcnnParams::zeros(arch);
  CHECK_THROWS_AS(fcnn_forward(arch, p, std::vector<double>{1.0}), ArgumentError);
  FcnnParams bad = p;
  bad.weights[0] = Eigen::MatrixXd::Zero(2, 2);
  CHECK_THROWS_AS(fcnn_forward(arch, bad, std::vector<double>{1.0, 2.0}), ArgumentError);
}

TEST_CASE("constant hypotheses are producible for every label") {
  for (Activation act : {Activation::relu, Activation::sigmoid}) {
    FcnnArchitecture arch{{2, 6, 6, 4}, act};
    for (int y = 1; y <= 4; ++y) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
      e(y - 1) = 1.0;
      const NetworkClassifier h(Network(arch, constant_output_params(arch, e)), 4);
      for (double v : {-10.0, 0.0, 3.0}) CHECK(h(Point{v, -v}) == y);
    }
  }
}

TEST_CASE("induced label uses the largest maximizing index") {
  CHECK(argmax({1.0, 0.0}) == 1);
  CHECK(argmax({0.3, 0.3}) == 2);
  CHECK(argmax({0.1, 0.5, 0.5}) == 3);
  CHECK_THROWS_AS(argmax({}), ArgumentError);
  // Invariant under shifts and positive scaling.
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> f(4);
    for (auto& v : f) v = std::floor(rng.uniform(0, 4));  // frequent ties
    const Label base = argmax(f);
    std::vector<double> g = f, h = f;
    for (auto& v : g) v += 3.0;
    for (auto& v : h) v *= 2.5;
    CHECK(argmax(g) == base);
    CHECK(argmax(h) == base);
  }
}

TEST_CASE("scores against long-double evaluation") {
  const long double e = std::exp(1.0L);
  CHECK(std::abs(score_of({0, 0}, ScoreKind::softmax()) - 0.5) <= 1e-15);
  CHECK(std::abs(score_of({0, 0}, ScoreKind::energy(1)) - static_cast<double>(std::log(2.0L))) <= 1e-12);
  CHECK(std::abs(score_of({2, 0}, ScoreKind::scaled(2)) - static_cast<double>(e / (e + 1.0L))) <= 1e-12);
  CHECK(std::abs(score_of({2, 0}, ScoreKind::softmax()) - static_cast<double>(e * e / (e * e + 1.0L))) <= 1e-12);
  CHECK_THROWS_AS(score_of({1, 2}, ScoreKind::energy(0)), ArgumentError);
  CHECK_THROWS_AS(score_of({1, 2}, ScoreKind::scaled(-1)), ArgumentError);
}

TEST_CASE("score ranges and stabilization") {
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> f(3);
    for (auto& v : f) v = rng.uniform(-5, 5);
    const double s = score_of(f, ScoreKind::softmax());
    CHECK(s > 1.0 / 3.0);
    CHECK(s <= 1.0);
    const double c = rng.uniform(-10, 10);
    std::vector<double> g = f;
    for (auto& v : g) v += c;
    CHECK(std::abs(score_of(g, ScoreKind::energy(1.5)) - score_of(f, ScoreKind::energy(1.5)) - c) <= 1e-9);
  }
  const double big = score_of({1000, 0}, ScoreKind::energy(1));
  CHECK(std::isfinite(big));
  CHECK(std::abs(big - (1000.0 + std::log1p(std::exp(-1000.0)))) <= 1e-9);
  CHECK(score_of({1000, 0}, ScoreKind::softmax()) == doctest::Approx(1.0));
}

TEST_CASE("score classifier threshold range and boundary") {
  FcnnArchitecture arch{{1, 2, 2}, Activation::relu};
  Eigen::VectorXd out(2);
  out << 0.0, 0.0;
  const Network net(arch, constant_output_params(arch, out));
  CHECK_THROWS_AS(ScoreClassifier(net, ScoreKind::softmax(), 0.5), ArgumentError);  // 1/l is excluded
  CHECK_THROWS_AS(ScoreClassifier(net, ScoreKind::softmax(), 1.0), ArgumentError);
  CHECK_THROWS_AS(ScoreClassifier(net, ScoreKind::energy(), 0.0), ArgumentError);
  CHECK_NOTHROW(ScoreClassifier(net, ScoreKind::softmax(), 0.6));

  // Energy on (0, 0) is ln 2: exactly at the threshold counts as ID.
  const ScoreClassifier at(net, ScoreKind::energy(), score_of({0, 0}, ScoreKind::energy()));
  CHECK(at(Point{3.0}) == 1);
  const ScoreClassifier above(net, ScoreKind::energy(), 0.5);
  CHECK(above(Point{3.0}) == 1);
  const ScoreClassifier all_ood(net, ScoreKind::energy(), 5.0);
  for (double v : {-4.0, 0.0, 9.0}) CHECK(all_ood(Point{v}) == 2);
}

TEST_CASE("composite rule and binary relabeling") {
  CompositeHypothesis h{[](const Point&) { return 3; }, [](const Point& x) { return x[0] > 0 ? 1 : 2; }, 5};
  CHECK(h(Point{1.0}) == 3);
  CHECK(h(Point{-1.0}) == 6);
  CHECK(compose(h, Point{-1.0}) == 6);
  CHECK(relabel_binary([](const Point&) { return 3; }, 5, Point{0.0}) == 1);
  CHECK(relabel_binary([](const Point&) { return 6; }, 5, Point{0.0}) == 2);

  // h_b identically 1 reduces the composite to h_in.
  CompositeHypothesis id_only{[](const Point& x) { return x[0] > 0 ? 2 : 1; }, [](const Point&) { return 1; }, 2};
  for (double v : {-1.0, 1.0}) CHECK(id_only(Point{v}) == id_only.h_in(Point{v}));

  // phi(compose(h_in, h_b)) = h_b over all table composites on |X| = 3.
  const auto f = line_features(3);
  const TableSpace ins = enumerate_space(f, 2);
  std::vector<std::vector<Label>> bins;
  enumerate_space(f, 1).for_each([&](std::size_t, const std::vector<Label>& a) { bins.push_back(a); });
  ins.for_each([&](std::size_t i, const std::vector<Label>&) {
    const TableHypothesis hin = ins.at(i);
    bool id_range = true;
    for (Label y : hin.assignment()) id_range = id_range && y <= 2;
    if (!id_range) return;
    for (const auto& b : bins) {
      const TableHypothesis hb(f, b, 1);
      const CompositeHypothesis c{hin, hb, 2};
      for (const auto& x : f->points()) CHECK(relabel_binary(c, 2, x) == hb(x));
    }
  });
}

TEST_CASE("table space enumeration") {
  CHECK(enumerate_space(line_features(2), 1).size() == 4);
  CHECK(enumerate_space(line_features(3), 2).size() == 27);
  const auto f = line_features(2);
  const TableSpace all = enumerate_space(f, 1);
  const TableHypothesis h_out = constant_table(f, 1, 2);
  CHECK(all.filtered([&](const TableHypothesis& h) { return !(h == h_out); }).size() == 3);

  // Mixed radix: first feature is the fastest digit.
  CHECK(all.assignment(0) == std::vector<Label>{1, 1});
  CHECK(all.assignment(1) == std::vector<Label>{2, 1});
  CHECK(all.assignment(2) == std::vector<Label>{1, 2});

  // No duplicates, exhaustive, and for_each agrees with assignment(i).
  const TableSpace big = enumerate_space(line_features(4), 2);
  std::set<std::vector<Label>> seen;
  big.for_each([&](std::size_t i, const std::vector<Label>& a) {
    CHECK(a == big.assignment(i));
    seen.insert(a);
  });
  CHECK(seen.size() == 81);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    std::vector<Label> r(4);
    for (auto& y : r) y = 1 + static_cast<Label>(rng.index(3));
    CHECK(seen.count(r) == 1);
  }

  CHECK_THROWS_AS(enumerate_space(line_features(15), 2), CapacityError);  // 3^15 > 1e7
  CHECK_NOTHROW(enumerate_space(line_features(14), 2));                  // 3^14 < 1e7
}

TEST_CASE("table hypotheses reject points outside the feature set") {
  const auto f = line_features(3);
  const TableHypothesis h(f, {1, 2, 1}, 1);
  CHECK(h(Point{1.0}) == 2);
  CHECK_THROWS_AS(h(Point{0.5}), DomainError);
  CHECK_THROWS_AS(TableHypothesis(f, {1, 3, 1}, 1), ArgumentError);
  CHECK_THROWS_AS(TableHypothesis(f, {1, 2}, 1), ArgumentError);
  CHECK(f->min_pairwise_distance() == 1.0);
}
