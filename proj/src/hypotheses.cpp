#include "oodlab/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace oodlab {

FeatureSet::FeatureSet(std::vector<Point> points) : points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_.empty() && points_[i].size() != points_.front().size())
      throw ArgumentError("feature points have inconsistent dimension");
    if (!index_.emplace(points_[i], i).second)
      throw ArgumentError("feature points must be distinct");
  }
}

std::optional<std::size_t> FeatureSet::find(const Point& p) const {
  auto it = index_.find(p);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FeatureSet::index_of(const Point& p) const {
  auto i = find(p);
  if (!i) throw DomainError("point is outside the hypothesis feature set");
  return *i;
}

double FeatureSet::min_pairwise_distance() const {
  if (points_.size() < 2) throw ArgumentError("need at least two feature points");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = i + 1; j < points_.size(); ++j)
      best = std::min(best, distance(points_[i], points_[j]));
  return best;
}

TableHypothesis::TableHypothesis(FeatureSetPtr features, std::vector<Label> assignment, int k)
    : features_(std::move(features)), assignment_(std::move(assignment)), k_(k) {
  if (assignment_.size() != features_->size())
    throw ArgumentError("table needs one label per feature point");
  for (Label y : assignment_)
    if (y < 1 || y > k_ + 1) throw ArgumentError("table label out of range");
}

Label TableHypothesis::operator()(const Point& x) const {
  return assignment_[features_->index_of(x)];
}

TableSpace TableSpace::all(FeatureSetPtr features, int k) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  const double count = std::pow(static_cast<double>(k + 1), static_cast<double>(features->size()));
  if (count > kCapacity) {
    std::ostringstream msg;
    msg << "(k+1)^|X| = " << count << " exceeds enumeration capacity " << kCapacity;
    throw CapacityError(msg.str());
  }
  return TableSpace(std::move(features), k, true, {});
}

TableSpace TableSpace::of(FeatureSetPtr features, int k, std::vector<std::vector<Label>> tables) {
  for (const auto& t : tables) TableHypothesis(features, t, k);  // validates
  return TableSpace(std::move(features), k, false, std::move(tables));
}

std::size_t TableSpace::size() const {
  if (!all_) return tables_.size();
  std::size_t n = 1;
  for (std::size_t i = 0; i < features_->size(); ++i) n *= static_cast<std::size_t>(k_ + 1);
  return n;
}

std::vector<Label> TableSpace::assignment(std::size_t i) const {
  if (!all_) return tables_.at(i);
  std::vector<Label> digits(features_->size());
  for (auto& d : digits) {
    d = static_cast<Label>(i % static_cast<std::size_t>(k_ + 1)) + 1;
    i /= static_cast<std::size_t>(k_ + 1);
  }
  return digits;
}

TableSpace TableSpace::filtered(const std::function<bool(const TableHypothesis&)>& keep) const {
  std::vector<std::vector<Label>> kept;
  for_each([&](std::size_t, const std::vector<Label>& a) {
    if (keep(TableHypothesis(features_, a, k_))) kept.push_back(a);
  });
  return TableSpace(features_, k_, false, std::move(kept));
}

TableSpace enumerate_space(FeatureSetPtr features, int k) {
  return TableSpace::all(std::move(features), k);
}

TableHypothesis constant_table(FeatureSetPtr features, int k, Label y) {
  std::vector<Label> a(features->size(), y);
  return TableHypothesis(std::move(features), std::move(a), k);
}

Label induced_label(std::span<const double> scores) {
  if (scores.empty()) throw ArgumentError("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] >= scores[best]) best = i;
  return static_cast<Label>(best) + 1;
}

double score(std::span<const double> f, const ScoreKind& kind) {
  if (f.empty()) throw ArgumentError("score of an empty vector");
  const double t = kind.type == ScoreKind::Type::softmax ? 1.0 : kind.temperature;
  if (!(t > 0.0)) throw ArgumentError("temperature must be positive");
  const double m = *std::max_element(f.begin(), f.end());
  double z = 0.0;
  for (double v : f) z += std::exp((v - m) / t);
  switch (kind.type) {
    case ScoreKind::Type::softmax:
    case ScoreKind::Type::temperature:
      return 1.0 / z;
    case ScoreKind::Type::energy:
      return m + t * std::log(z);
  }
  return 0.0;
}

ScoreClassifier::ScoreClassifier(Network scorer, ScoreKind kind, double lambda)
    : ScoreClassifier(std::move(scorer), kind, lambda, NoCheck{}) {
  const double l = static_cast<double>(scorer_.arch.output_dim());
  if (kind_.type == ScoreKind::Type::energy) {
    if (!(lambda_ > 0.0 && std::isfinite(lambda_)))
      throw ArgumentError("energy threshold must lie in (0, inf)");
  } else if (!(lambda_ > 1.0 / l && lambda_ < 1.0)) {
    throw ArgumentError("softmax threshold must lie in (1/l, 1)");
  }
}

ScoreClassifier::ScoreClassifier(Network scorer, ScoreKind kind, double lambda, NoCheck)
    : scorer_(std::move(scorer)), kind_(kind), lambda_(lambda) {
  if (kind_.type != ScoreKind::Type::softmax && !(kind_.temperature > 0.0))
    throw ArgumentError("temperature must be positive");
}

ScoreClassifier ScoreClassifier::unchecked(Network scorer, ScoreKind kind, double lambda) {
  return ScoreClassifier(std::move(scorer), kind, lambda, NoCheck{});
}

double ScoreClassifier::score_of(const Point& x) const {
  Eigen::VectorXd f = scorer_.outputs(x);
  return score(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())), kind_);
}

Label ScoreClassifier::classify(const Point& x) const { return score_of(x) >= lambda_ ? 1 : 2; }

NetworkClassifier::NetworkClassifier(Network net, int k) : net_(std::move(net)), k_(k) {
  if (k_ < 1 || k_ > net_.arch.output_dim())
    throw ArgumentError("network has fewer outputs than ID classes");
}

Label NetworkClassifier::operator()(const Point& x) const {
  Eigen::VectorXd f = net_.outputs(x);
  return induced_label(std::span<const double>(f.data(), static_cast<std::size_t>(k_)));
}

Label CompositeHypothesis::operator()(const Point& x) const {
  return h_b(x) == 1 ? h_in(x) : k + 1;
}

Label compose(const CompositeHypothesis& h, const Point& x) { return h(x); }

Label relabel_binary(const Hypothesis& h, int k, const Point& x) {
  const Label y = h(x);
  return (y >= 1 && y <= k) ? 1 : 2;
}

}  // namespace oodlab
