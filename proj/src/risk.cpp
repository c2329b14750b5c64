#include "oodlab/risk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "oodlab/parallel.hpp"

namespace oodlab {

Loss::Loss(std::vector<std::vector<double>> table) : table_(std::move(table)) {
  const std::size_t n = table_.size();
  if (n < 2) throw ArgumentError("loss table needs at least two labels");
  for (std::size_t i = 0; i < n; ++i) {
    if (table_[i].size() != n) throw ArgumentError("loss table must be square");
    for (std::size_t j = 0; j < n; ++j) {
      const double v = table_[i][j];
      if (!std::isfinite(v) || v < 0.0) throw ArgumentError("loss entries must be finite and >= 0");
      if (i == j && v != 0.0) throw ArgumentError("loss must vanish on the diagonal");
      if (i != j && !(v > 0.0)) throw ArgumentError("loss must be positive off the diagonal");
      bound_ = std::max(bound_, v);
    }
  }
}

Loss Loss::zero_one(int k) {
  if (k < 1) throw ArgumentError("k must be >= 1");
  const std::size_t n = static_cast<std::size_t>(k) + 1;
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) t[i][i] = 0.0;
  return Loss(std::move(t));
}

RiskBreakdown risk_breakdown(const RiskPair& r, const std::vector<double>& alphas) {
  RiskBreakdown b{r.r_in, r.r_out, {}};
  b.alpha_curve.reserve(alphas.size());
  for (double a : alphas) b.alpha_curve.emplace_back(a, r.at(a));
  return b;
}

double risk_exact(const Hypothesis& h, const JointDistribution& joint, const Loss& loss) {
  if (!joint.is_discrete()) throw UnsupportedError("exact risk needs a discrete joint");
  KahanSum s;
  const auto& atoms = joint.discrete().atoms();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].mass == 0.0) continue;
    s.add(atoms[i].mass * loss(h(atoms[i].point), joint.labels()[i]));
  }
  return s.value();
}

RiskPair risk_pair_exact(const Hypothesis& h, const Domain& domain, const Loss& loss) {
  return {risk_exact(h, domain.id(), loss), risk_exact(h, domain.ood(), loss)};
}

McEstimate risk_mc(const Hypothesis& h, const JointDistribution& joint, const Loss& loss,
                   std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("Monte Carlo risk needs n >= 1");
  const auto draws = sample(joint, n, seed);
  KahanSum s;
  KahanSum s2;
  for (const auto& d : draws) {
    const double v = loss(h(d.x), d.y);
    s.add(v);
    s2.add(v * v);
  }
  const double nn = static_cast<double>(n);
  const double mean = s.value() / nn;
  double var = 0.0;
  if (n > 1) var = std::max(0.0, (s2.value() - nn * mean * mean) / (nn - 1.0));
  return {mean, std::sqrt(var / nn)};
}

double risk_grid(const Hypothesis& h, const JointDistribution& joint, const Loss& loss,
                 int cells) {
  if (joint.is_discrete()) return risk_exact(h, joint, loss);
  if (cells < 1) throw ArgumentError("grid needs at least one cell per axis");
  KahanSum total;
  const auto& comps = joint.rects().components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (comps[c].weight == 0.0) continue;
    const Rect& r = comps[c].rect;
    const std::size_t d = r.dimension();
    std::size_t count = 1;
    for (std::size_t j = 0; j < d; ++j) count *= static_cast<std::size_t>(cells);
    KahanSum inner;
    Point x(d);
    for (std::size_t idx = 0; idx < count; ++idx) {
      std::size_t rem = idx;
      for (std::size_t j = 0; j < d; ++j) {
        const std::size_t i = rem % static_cast<std::size_t>(cells);
        rem /= static_cast<std::size_t>(cells);
        x[j] = r.lo[j] + (r.hi[j] - r.lo[j]) * (static_cast<double>(i) + 0.5) / cells;
      }
      inner.add(loss(h(x), joint.labels()[c]));
    }
    total.add(comps[c].weight * inner.value() / static_cast<double>(count));
  }
  return total.value();
}

TableRiskEvaluator::TableRiskEvaluator(const FeatureSet& features, const Domain& domain,
                                       const Loss& loss) {
  if (!domain.id().is_discrete() || !domain.ood().is_discrete())
    throw UnsupportedError("table risks need a discrete domain");
  const int labels = domain.k() + 1;
  if (loss.k() != domain.k()) throw ArgumentError("loss and domain disagree on k");
  in_.assign(features.size(), std::vector<double>(labels, 0.0));
  out_.assign(features.size(), std::vector<double>(labels, 0.0));

  auto fill = [&](const JointDistribution& j, std::vector<std::vector<double>>& cost) {
    const auto& atoms = j.discrete().atoms();
    for (std::size_t a = 0; a < atoms.size(); ++a) {
      if (atoms[a].mass == 0.0) continue;
      const std::size_t p = features.index_of(atoms[a].point);
      for (Label y = 1; y <= labels; ++y) cost[p][y - 1] += atoms[a].mass * loss(y, j.labels()[a]);
    }
  };
  fill(domain.id(), in_);
  fill(domain.ood(), out_);
}

RiskPair TableRiskEvaluator::operator()(const std::vector<Label>& assignment) const {
  KahanSum in;
  KahanSum out;
  for (std::size_t p = 0; p < assignment.size(); ++p) {
    in.add(in_[p][assignment[p] - 1]);
    out.add(out_[p][assignment[p] - 1]);
  }
  return {in.value(), out.value()};
}

std::vector<RiskPair> table_risks(const TableSpace& space, const Domain& domain, const Loss& loss) {
  if (space.k() != domain.k()) throw ArgumentError("space and domain disagree on k");
  TableRiskEvaluator eval(*space.features(), domain, loss);
  std::vector<RiskPair> out(space.size());
  space.for_each([&](std::size_t i, const std::vector<Label>& a) { out[i] = eval(a); });
  return out;
}

InfimumCertificate certify_minimum(const TableSpace& space, const std::vector<double>& values) {
  InfimumCertificate cert;
  if (values.empty()) throw ArgumentError("infimum over an empty space");
  cert.value = *std::min_element(values.begin(), values.end());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] <= cert.value + kTieTolerance) {
      cert.argmin_indices.push_back(i);
      cert.argmin.push_back(space.at(i));
    }
  }
  return cert;
}

InfimumCertificate inf_risk(const TableSpace& space, const Domain& domain, double alpha,
                            const Loss& loss) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
  const auto risks = table_risks(space, domain, loss);
  std::vector<double> values(risks.size());
  for (std::size_t i = 0; i < risks.size(); ++i) values[i] = risks[i].at(alpha);
  return certify_minimum(space, values);
}

double bayes_alpha_risk(const Domain& domain, double alpha, const Loss& loss) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
  const auto& id = domain.id();
  const auto& ood = domain.ood();
  const int labels = domain.k() + 1;
  const Label out_label = domain.label_space().ood();

  // Pointwise minimum of the conditional alpha-risk given per-label ID density
  // and the OOD density at one location.
  auto pointwise = [&](const std::vector<double>& id_by_label, double f_out) {
    double best = std::numeric_limits<double>::infinity();
    for (Label y = 1; y <= labels; ++y) {
      double v = alpha * f_out * loss(y, out_label);
      for (Label t = 1; t <= labels; ++t)
        if (id_by_label[t - 1] != 0.0) v += (1.0 - alpha) * id_by_label[t - 1] * loss(y, t);
      best = std::min(best, v);
    }
    return best;
  };

  if (id.is_discrete() && ood.is_discrete()) {
    std::map<Point, std::pair<std::vector<double>, double>> at;
    const auto& ia = id.discrete().atoms();
    for (std::size_t i = 0; i < ia.size(); ++i) {
      auto& slot = at[ia[i].point];
      slot.first.resize(labels, 0.0);
      slot.first[id.labels()[i] - 1] += ia[i].mass;
    }
    for (const auto& a : ood.discrete().atoms()) {
      auto& slot = at[a.point];
      slot.first.resize(labels, 0.0);
      slot.second += a.mass;
    }
    KahanSum total;
    for (const auto& [p, v] : at) total.add(pointwise(v.first, v.second));
    return total.value();
  }
  if (id.is_discrete() || ood.is_discrete())
    throw UnsupportedError("Bayes risk needs both marginals of the same kind");

  std::vector<const Rect*> all;
  for (const auto* j : {&id, &ood})
    for (const auto& c : j->rects().components())
      if (c.weight > 0.0) all.push_back(&c.rect);

  KahanSum total;
  std::vector<double> by_label(labels);
  for_each_arrangement_cell(all, [&](const std::vector<double>& centre, double volume) {
    std::fill(by_label.begin(), by_label.end(), 0.0);
    const auto& ic = id.rects().components();
    for (std::size_t c = 0; c < ic.size(); ++c)
      if (ic[c].weight > 0.0 && ic[c].rect.contains(centre))
        by_label[id.labels()[c] - 1] += ic[c].weight / ic[c].rect.volume();
    const double f_out = ood.rects().density(centre);
    const double v = pointwise(by_label, f_out);
    if (v != 0.0) total.add(v * volume);
  });
  return total.value();
}

RiskPair evaluate_risk_pair(const Hypothesis& h, const Domain& domain, const Loss& loss,
                            const RiskEvaluation& how) {
  switch (how.mode) {
    case RiskEvaluation::Mode::exact:
      return risk_pair_exact(h, domain, loss);
    case RiskEvaluation::Mode::grid:
      return {risk_grid(h, domain.id(), loss, how.grid_cells),
              risk_grid(h, domain.ood(), loss, how.grid_cells)};
    case RiskEvaluation::Mode::monte_carlo:
      return {risk_mc(h, domain.id(), loss, how.mc_samples, how.mc_seed).estimate,
              risk_mc(h, domain.ood(), loss, how.mc_samples, how.mc_seed + 1).estimate};
  }
  return {};
}

AlgorithmRisk summarize_risks(std::vector<std::uint64_t> seeds, std::vector<RiskPair> per_seed,
                              const std::vector<double>& alphas) {
  AlgorithmRisk out;
  out.seeds = std::move(seeds);
  out.per_seed = std::move(per_seed);
  const double n = static_cast<double>(out.per_seed.size());
  KahanSum in;
  KahanSum ood;
  for (const auto& r : out.per_seed) {
    in.add(r.r_in);
    ood.add(r.r_out);
  }
  out.mean_r_in = n > 0 ? in.value() / n : 0.0;
  out.mean_r_out = n > 0 ? ood.value() / n : 0.0;
  for (double a : alphas) {
    // The mean of affine curves is the affine curve of the means.
    const double mean = (1.0 - a) * out.mean_r_in + a * out.mean_r_out;
    KahanSum sq;
    for (const auto& r : out.per_seed) {
      const double d = r.at(a) - mean;
      sq.add(d * d);
    }
    const double sd = n > 1 ? std::sqrt(sq.value() / (n - 1.0)) : 0.0;
    out.rows.push_back({a, mean, sd});
  }
  return out;
}

AlgorithmRisk expected_algorithm_risk(const Algorithm& alg, const Domain& domain, std::size_t n,
                                      const std::vector<std::uint64_t>& seeds,
                                      const std::vector<double>& alphas, const Loss& loss,
                                      const RiskEvaluation& how, int jobs) {
  std::vector<RiskPair> per_seed(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    const LabeledSample s = sample(domain.id(), n, seeds[i]);
    const Hypothesis h = alg(s);
    per_seed[i] = evaluate_risk_pair(h, domain, loss, how);
  });
  return summarize_risks(seeds, std::move(per_seed), alphas);
}

}  // namespace oodlab
