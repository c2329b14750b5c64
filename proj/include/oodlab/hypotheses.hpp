#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "oodlab/core.hpp"
#include "oodlab/fcnn.hpp"

namespace oodlab {

/// Any classifier from features to {1..k+1}.
using Hypothesis = std::function<Label(const Point&)>;

/// Finite, ordered feature space. Order fixes the enumeration order of tables.
class FeatureSet {
 public:
  explicit FeatureSet(std::vector<Point> points);

  const std::vector<Point>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::optional<std::size_t> find(const Point& p) const;
  std::size_t index_of(const Point& p) const;  // throws DomainError

  /// Smallest Euclidean distance between two distinct points.
  double min_pairwise_distance() const;

 private:
  std::vector<Point> points_;
  std::map<Point, std::size_t> index_;
};

using FeatureSetPtr = std::shared_ptr<const FeatureSet>;

class TableHypothesis {
 public:
  TableHypothesis(FeatureSetPtr features, std::vector<Label> assignment, int k);

  Label operator()(const Point& x) const;
  Label at(std::size_t i) const { return assignment_[i]; }
  const std::vector<Label>& assignment() const { return assignment_; }
  const FeatureSetPtr& features() const { return features_; }
  int k() const { return k_; }

  friend bool operator==(const TableHypothesis& a, const TableHypothesis& b) {
    return a.assignment_ == b.assignment_ && a.k_ == b.k_;
  }

 private:
  FeatureSetPtr features_;
  std::vector<Label> assignment_;
  int k_;
};

/// An enumerable space of table hypotheses over one feature set: either all
/// (k+1)^|X| tables in mixed-radix order (first feature is the fastest digit)
/// or an explicit list.
class TableSpace {
 public:
  static constexpr double kCapacity = 1e7;

  /// Throws CapacityError when (k+1)^|X| exceeds kCapacity.
  static TableSpace all(FeatureSetPtr features, int k);
  static TableSpace of(FeatureSetPtr features, int k, std::vector<std::vector<Label>> tables);

  std::size_t size() const;
  bool is_all() const { return all_; }
  int k() const { return k_; }
  const FeatureSetPtr& features() const { return features_; }

  std::vector<Label> assignment(std::size_t i) const;
  TableHypothesis at(std::size_t i) const { return {features_, assignment(i), k_}; }

  TableSpace filtered(const std::function<bool(const TableHypothesis&)>& keep) const;

  /// fn(index, assignment) for every member in order.
  template <class Fn>
  void for_each(Fn&& fn) const {
    const std::size_t n = size();
    if (!all_) {
      for (std::size_t i = 0; i < n; ++i) fn(i, static_cast<const std::vector<Label>&>(tables_[i]));
      return;
    }
    std::vector<Label> digits(features_->size(), 1);
    for (std::size_t i = 0; i < n; ++i) {
      fn(i, static_cast<const std::vector<Label>&>(digits));
      for (auto& d : digits) {
        if (++d <= k_ + 1) break;
        d = 1;
      }
    }
  }

 private:
  TableSpace(FeatureSetPtr f, int k, bool all, std::vector<std::vector<Label>> t)
      : features_(std::move(f)), k_(k), all_(all), tables_(std::move(t)) {}

  FeatureSetPtr features_;
  int k_;
  bool all_;
  std::vector<std::vector<Label>> tables_;
};

/// Lazily enumerable all-tables space; capacity guard applies.
TableSpace enumerate_space(FeatureSetPtr features, int k);

/// Constant table with every point labeled `y` (h^in := 1, h^out := k+1, ...).
TableHypothesis constant_table(FeatureSetPtr features, int k, Label y);

/// 1-based argmax; ties resolve to the largest maximizing index.
Label induced_label(std::span<const double> scores);

struct ScoreKind {
  enum class Type { softmax, temperature, energy };
  Type type = Type::softmax;
  double temperature = 1.0;

  static ScoreKind softmax() { return {Type::softmax, 1.0}; }
  static ScoreKind scaled(double t) { return {Type::temperature, t}; }
  static ScoreKind energy(double t = 1.0) { return {Type::energy, t}; }
};

/// Softmax confidence, temperature-scaled confidence, or free energy
/// T log sum exp(f_c / T); all computed with a max shift.
double score(std::span<const double> f, const ScoreKind& kind);

class ScoreClassifier {
 public:
  /// Checks lambda against the range of the scoring rule.
  ScoreClassifier(Network scorer, ScoreKind kind, double lambda);

  /// Skips the range check (calibrated or overridden thresholds).
  static ScoreClassifier unchecked(Network scorer, ScoreKind kind, double lambda);

  double score_of(const Point& x) const;
  /// 1 (ID) iff score >= lambda, else 2.
  Label classify(const Point& x) const;
  Label operator()(const Point& x) const { return classify(x); }

  const Network& scorer() const { return scorer_; }
  const ScoreKind& kind() const { return kind_; }
  double lambda() const { return lambda_; }

 private:
  struct NoCheck {};
  ScoreClassifier(Network scorer, ScoreKind kind, double lambda, NoCheck);

  Network scorer_;
  ScoreKind kind_;
  double lambda_;
};

/// ID classifier induced by the first k outputs of a network.
class NetworkClassifier {
 public:
  NetworkClassifier(Network net, int k);
  Label operator()(const Point& x) const;
  const Network& network() const { return net_; }

 private:
  Network net_;
  int k_;
};

/// h(x) = h_in(x) if h_b(x) = 1, otherwise k+1.
struct CompositeHypothesis {
  Hypothesis h_in;
  Hypothesis h_b;
  int k = 1;

  Label operator()(const Point& x) const;
};

Label compose(const CompositeHypothesis& h, const Point& x);

/// 1 iff h(x) is an ID label, else 2.
Label relabel_binary(const Hypothesis& h, int k, const Point& x);

}  // namespace oodlab
