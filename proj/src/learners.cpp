#include "oodlab/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace oodlab {

namespace {

// cost[p][y-1] = sum over sample points equal to feature p of l(y, y_i).
std::vector<std::vector<double>> sample_costs(const FeatureSet& features, const LabeledSample& s,
                                              const Loss& loss, int k) {
  std::vector<std::vector<double>> cost(features.size(), std::vector<double>(k + 1, 0.0));
  for (const auto& d : s) {
    const std::size_t p = features.index_of(d.x);
    for (Label y = 1; y <= k + 1; ++y) cost[p][y - 1] += loss(y, d.y);
  }
  return cost;
}

std::vector<double> unlabeled_counts(const FeatureSet& features, const std::vector<Point>& u) {
  std::vector<double> counts(features.size(), 0.0);
  for (const auto& x : u) counts[features.index_of(x)] += 1.0;
  return counts;
}

// Sample points constrained to a label; conflicting labels make the
// feasible set empty.
std::vector<Label> forced_labels(const FeatureSet& features, const LabeledSample& s) {
  std::vector<Label> forced(features.size(), 0);
  for (const auto& d : s) {
    Label& f = forced[features.index_of(d.x)];
    if (f != 0 && f != d.y)
      throw InfeasibleError("no hypothesis fits the ID sample (realizability violated)");
    f = d.y;
  }
  return forced;
}

}  // namespace

TableHypothesis nn_threshold(const LabeledSample& s, const FeatureSetPtr& features) {
  if (s.empty()) throw ArgumentError("nn_threshold needs a nonempty sample");
  const double d0 = features->min_pairwise_distance();
  std::vector<Label> labels(features->size());
  for (std::size_t i = 0; i < features->size(); ++i) {
    const Point& x = features->points()[i];
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& d : s) nearest = std::min(nearest, distance(x, d.x));
    labels[i] = nearest < 0.5 * d0 ? 1 : 2;
  }
  return TableHypothesis(features, std::move(labels), 1);
}

double empirical_risk(const TableHypothesis& h, const LabeledSample& s, const Loss& loss) {
  if (s.empty()) return 0.0;
  KahanSum total;
  for (const auto& d : s) total.add(loss(h(d.x), d.y));
  return total.value() / static_cast<double>(s.size());
}

TableHypothesis erm_enumerate(const TableSpace& space, const LabeledSample& s, const Loss& loss) {
  const FeatureSet& features = *space.features();
  const auto cost = sample_costs(features, s, loss, space.k());
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_index = 0;
  space.for_each([&](std::size_t i, const std::vector<Label>& a) {
    KahanSum v;
    for (std::size_t p = 0; p < a.size(); ++p) v.add(cost[p][a[p] - 1]);
    if (v.value() < best - kTieTolerance) {
      best = v.value();
      best_index = i;
    }
  });
  if (space.size() == 0) throw ArgumentError("ERM over an empty space");
  return space.at(best_index);
}

TableHypothesis erm(const TableSpace& space, const LabeledSample& s, const Loss& loss) {
  if (!space.is_all()) return erm_enumerate(space, s, loss);
  const FeatureSet& features = *space.features();
  const auto cost = sample_costs(features, s, loss, space.k());
  std::vector<Label> a(features.size(), 1);
  for (std::size_t p = 0; p < features.size(); ++p) {
    for (Label y = 2; y <= space.k() + 1; ++y)
      if (cost[p][y - 1] < cost[p][a[p] - 1] - kTieTolerance) a[p] = y;
  }
  return TableHypothesis(space.features(), std::move(a), space.k());
}

TableHypothesis constrained_erm_enumerate(const TableSpace& space, const LabeledSample& s,
                                          const std::vector<Point>& unlabeled, const Loss& loss) {
  const FeatureSet& features = *space.features();
  const int k = space.k();
  const auto cost = sample_costs(features, s, loss, k);
  const auto counts = unlabeled_counts(features, unlabeled);
  double best = std::numeric_limits<double>::infinity();
  std::optional<std::size_t> best_index;
  space.for_each([&](std::size_t i, const std::vector<Label>& a) {
    for (std::size_t p = 0; p < a.size(); ++p)
      if (cost[p][a[p] - 1] != 0.0) return;
    KahanSum v;
    for (std::size_t p = 0; p < a.size(); ++p) v.add(counts[p] * loss(a[p], k + 1));
    if (!best_index || v.value() < best - kTieTolerance) {
      best = v.value();
      best_index = i;
    }
  });
  if (!best_index) throw InfeasibleError("no hypothesis fits the ID sample (realizability violated)");
  return space.at(*best_index);
}

TableHypothesis constrained_erm(const TableSpace& space, const LabeledSample& s,
                                const std::vector<Point>& unlabeled, const Loss& loss) {
  if (!space.is_all()) return constrained_erm_enumerate(space, s, unlabeled, loss);
  const FeatureSet& features = *space.features();
  const int k = space.k();
  const auto forced = forced_labels(features, s);
  const auto counts = unlabeled_counts(features, unlabeled);
  std::vector<Label> a(features.size(), 1);
  for (std::size_t p = 0; p < features.size(); ++p) {
    if (forced[p] != 0) {
      a[p] = forced[p];
      continue;
    }
    for (Label y = 2; y <= k + 1; ++y)
      if (counts[p] * loss(y, k + 1) < counts[p] * loss(a[p], k + 1) - kTieTolerance) a[p] = y;
  }
  return TableHypothesis(space.features(), std::move(a), k);
}

double mmd2(const LabeledSample& a, const LabeledSample& b, double bandwidth) {
  if (a.empty() || b.empty()) throw ArgumentError("MMD needs nonempty samples");
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ArgumentError("MMD bandwidth must be finite and positive");
  // Canonical argument order makes the result exactly symmetric.
  const bool swap = std::lexicographical_compare(
      b.begin(), b.end(), a.begin(), a.end(), [](const LabeledPoint& p, const LabeledPoint& q) {
        return p.y != q.y ? p.y < q.y : p.x < q.x;
      });
  const LabeledSample& p = swap ? b : a;
  const LabeledSample& q = swap ? a : b;
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);

  auto block = [&](const LabeledSample& u, const LabeledSample& v) {
    KahanSum s;
    for (const auto& x : u)
      for (const auto& y : v)
        if (x.y == y.y) s.add(std::exp(-squared_distance(x.x, y.x) * inv));
    return s.value();
  };
  const double np = static_cast<double>(p.size());
  const double nq = static_cast<double>(q.size());
  const double v = block(p, p) / (np * np) + block(q, q) / (nq * nq) - 2.0 * block(p, q) / (np * nq);
  return std::max(0.0, v);
}

double median_heuristic_bandwidth(const std::vector<const LabeledSample*>& pools) {
  std::vector<const Point*> pts;
  for (const auto* s : pools)
    for (const auto& d : *s) pts.push_back(&d.x);
  std::vector<double> dist;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) dist.push_back(distance(*pts[i], *pts[j]));
  auto median = [](std::vector<double> v) {
    if (v.empty()) return 0.0;
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    return *mid;
  };
  double m = median(dist);
  if (m > 0.0) return m;
  std::erase_if(dist, [](double d) { return d <= 0.0; });
  m = median(std::move(dist));
  return m > 0.0 ? m : 1.0;
}

MmdAnchors::MmdAnchors(std::vector<MmdAnchor> entries, double bandwidth)
    : entries_(std::move(entries)), bandwidth_(bandwidth) {
  if (entries_.empty()) throw ArgumentError("MMD selector needs at least one anchor");
  for (const auto& e : entries_)
    if (e.sample.empty()) throw ArgumentError("anchor samples must be nonempty");
  if (!(bandwidth_ > 0.0)) {
    std::vector<const LabeledSample*> pools;
    for (const auto& e : entries_) pools.push_back(&e.sample);
    bandwidth_ = median_heuristic_bandwidth(pools);
  }
  if (!std::isfinite(bandwidth_)) throw ArgumentError("MMD bandwidth must be finite");
}

Selection mmd_select(const LabeledSample& s, const MmdAnchors& anchors) {
  Selection best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const double v = mmd2(anchors.entries()[i].sample, s, anchors.bandwidth());
    if (v < best.mmd2) best = {i, v};
  }
  return best;
}

Algorithm mmd_selector_algorithm(std::shared_ptr<const MmdAnchors> anchors) {
  return [anchors](const LabeledSample& s) -> Hypothesis {
    const auto sel = mmd_select(s, *anchors);
    return anchors->entries()[sel.index].algorithm(s);
  };
}

ConvergenceReport convergence_sweep(const Algorithm& alg, const Domain& domain,
                                    const std::vector<std::size_t>& n_list,
                                    const std::vector<std::uint64_t>& seeds,
                                    const std::vector<double>& alphas, const Loss& loss,
                                    const RiskEvaluation& how, int jobs) {
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw ArgumentError("n_list must be strictly increasing");
  ConvergenceReport rep;
  for (std::size_t n : n_list)
    rep.rows.push_back({n, expected_algorithm_risk(alg, domain, n, seeds, alphas, loss, how, jobs)});
  return rep;
}

}  // namespace oodlab
