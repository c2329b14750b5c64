#include "oodlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace oodlab {

namespace {

struct Line {
  double intercept;  // R^in
  double slope;      // R^out - R^in
};

double min_over(const std::vector<RiskPair>& risks, double alpha) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : risks) best = std::min(best, r.at(alpha));
  return best;
}

double min_in(const std::vector<RiskPair>& risks) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : risks) best = std::min(best, r.r_in);
  return best;
}

double min_out(const std::vector<RiskPair>& risks) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : risks) best = std::min(best, r.r_out);
  return best;
}

ConditionReport linear_on_points(const std::vector<RiskPair>& risks,
                                 const std::vector<double>& alphas, double tol) {
  ConditionReport rep;
  rep.condition = "linear";
  if (risks.empty()) throw ArgumentError("condition check over an empty space");
  const double inf_in = min_over(risks, 0.0);
  const double inf_out = min_over(risks, 1.0);
  double worst = 0.0;
  double worst_alpha = 0.0;
  for (double a : alphas) {
    const double dev = std::abs(min_over(risks, a) - ((1.0 - a) * inf_in + a * inf_out));
    if (dev > worst) {
      worst = dev;
      worst_alpha = a;
    }
  }
  rep.max_deviation = worst;
  rep.holds = worst <= tol;
  if (!rep.holds) rep.violating_alpha = worst_alpha;
  return rep;
}

void require_same_k(const TableSpace& space, const Domain& domain, const Loss& loss) {
  if (space.k() != domain.k() || loss.k() != domain.k())
    throw ArgumentError("space, domain and loss disagree on k");
}

std::set<std::size_t> argmin_set(const std::vector<double>& values) {
  const double m = *std::min_element(values.begin(), values.end());
  std::set<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] <= m + kTieTolerance) out.insert(i);
  return out;
}

}  // namespace

std::vector<double> envelope_kinks(const std::vector<RiskPair>& risks) {
  std::vector<Line> lines;
  lines.reserve(risks.size());
  for (const auto& r : risks) lines.push_back({r.r_in, r.r_out - r.r_in});
  // Steepest first; among equal slopes keep the lowest intercept.
  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    return a.slope != b.slope ? a.slope > b.slope : a.intercept < b.intercept;
  });
  lines.erase(std::unique(lines.begin(), lines.end(),
                          [](const Line& a, const Line& b) { return a.slope == b.slope; }),
              lines.end());

  // Lower envelope over the whole real line (convex hull trick).
  std::vector<Line> hull;
  auto useless = [](const Line& l1, const Line& l2, const Line& l3) {
    // l2 never attains the minimum when l1 and l3 cross no later than l1 and l2.
    return (l3.intercept - l1.intercept) * (l1.slope - l2.slope) <=
           (l2.intercept - l1.intercept) * (l1.slope - l3.slope);
  };
  for (const auto& l : lines) {
    while (hull.size() >= 2 && useless(hull[hull.size() - 2], hull.back(), l)) hull.pop_back();
    hull.push_back(l);
  }

  std::vector<double> kinks;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i) {
    const double a = (hull[i + 1].intercept - hull[i].intercept) / (hull[i].slope - hull[i + 1].slope);
    if (a > 0.0 && a < 1.0) kinks.push_back(a);
  }
  return kinks;
}

ConditionReport check_linear(const TableSpace& space, const Domain& domain,
                             const std::vector<double>& alpha_grid, double tol,
                             const Loss& loss) {
  require_same_k(space, domain, loss);
  for (double a : alpha_grid)
    if (!(a >= 0.0 && a <= 1.0)) throw ArgumentError("alpha grid must lie in [0, 1]");
  const auto risks = table_risks(space, domain, loss);
  auto rep = linear_on_points(risks, alpha_grid, tol);
  std::ostringstream note;
  note << "alpha grid of " << alpha_grid.size() << " points";
  rep.note = note.str();
  return rep;
}

ConditionReport check_linear(const TableSpace& space, const Domain& domain, double tol,
                             const Loss& loss) {
  require_same_k(space, domain, loss);
  const auto risks = table_risks(space, domain, loss);
  auto grid = uniform_alpha_grid();
  const auto kinks = envelope_kinks(risks);
  grid.insert(grid.end(), kinks.begin(), kinks.end());
  std::sort(grid.begin(), grid.end());
  auto rep = linear_on_points(risks, grid, tol);
  std::ostringstream note;
  note << "101-point alpha grid plus " << kinks.size() << " envelope kinks";
  rep.note = note.str();
  return rep;
}

ConditionReport check_eps_intersection(const TableSpace& space, const Domain& domain, double eps,
                                       const Loss& loss) {
  require_same_k(space, domain, loss);
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  const auto risks = table_risks(space, domain, loss);
  const double inf_in = min_in(risks);
  const double inf_out = min_out(risks);
  ConditionReport rep;
  rep.condition = "eps_intersection";
  // The witness is the first member with the smallest simultaneous excess.
  double best_gap = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t i = 0; i < risks.size(); ++i) {
    const double gap = std::max(risks[i].r_in - inf_in, risks[i].r_out - inf_out);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  rep.holds = best_gap <= 2.0 * eps + kTieTolerance;
  if (rep.holds) rep.witness = space.at(best);
  // Smallest achievable simultaneous excess over both infima.
  rep.max_deviation = best_gap;
  std::ostringstream note;
  note << "eps = " << eps;
  rep.note = note.str();
  return rep;
}

ConditionReport check_eps_intersection_grid(const TableSpace& space, const Domain& domain,
                                            const std::vector<double>& eps_grid,
                                            const Loss& loss) {
  if (eps_grid.empty()) throw ArgumentError("empty eps grid");
  ConditionReport last;
  for (double eps : eps_grid) {
    last = check_eps_intersection(space, domain, eps, loss);
    if (!last.holds) break;
  }
  std::ostringstream note;
  note << last.note << " (finest grid point " << eps_grid.back() << ")";
  last.note = note.str();
  return last;
}

ConditionReport check_compatibility(const TableSpace& space, const std::vector<Domain>& domains,
                                    double eps, const Loss& loss) {
  if (domains.empty()) throw ArgumentError("compatibility needs at least one domain");
  if (!(eps > 0.0)) throw ArgumentError("eps must be positive");
  for (const auto& d : domains) {
    require_same_k(space, d, loss);
    if (!(d.id() == domains.front().id()))
      throw ArgumentError("domains in one equivalence class must share the ID joint");
  }
  std::vector<std::vector<RiskPair>> risks;
  std::vector<std::pair<double, double>> infima;
  for (const auto& d : domains) {
    risks.push_back(table_risks(space, d, loss));
    infima.emplace_back(min_in(risks.back()), min_out(risks.back()));
  }
  ConditionReport rep;
  rep.condition = "compatibility";
  double best_gap = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    double gap = 0.0;
    for (std::size_t d = 0; d < domains.size(); ++d)
      gap = std::max({gap, risks[d][i].r_in - infima[d].first, risks[d][i].r_out - infima[d].second});
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  rep.holds = best_gap <= eps + kTieTolerance;
  if (rep.holds) rep.witness = space.at(best);
  rep.max_deviation = best_gap;
  std::ostringstream note;
  note << domains.size() << " domains, eps = " << eps;
  rep.note = note.str();
  return rep;
}

bool check_condition3(const Loss& loss, int k) {
  if (loss.k() != k) throw ArgumentError("loss table does not have k+1 labels");
  for (Label y1 = 1; y1 <= k; ++y1)
    for (Label y2 = 1; y2 <= k; ++y2)
      if (loss(y2, y1) > loss(k + 1, y1)) return false;
  return true;
}

RealizabilityResult check_realizability(const TableSpace& space, const Domain& domain,
                                        const Loss& loss) {
  require_same_k(space, domain, loss);
  const auto risks = table_risks(space, domain, loss);
  RealizabilityResult out;
  for (std::size_t i = 0; i < risks.size(); ++i) {
    if (risks[i].at(domain.pi_out()) <= kTieTolerance) {
      out.holds = true;
      out.witness = space.at(i);
      break;
    }
  }
  return out;
}

bool check_argmin_decomposition(const TableSpace& space, const OodDecomposition& dec,
                                const Loss& loss) {
  if (space.k() != dec.label_space.k() || loss.k() != dec.label_space.k())
    throw ArgumentError("space, decomposition and loss disagree on k");
  const std::size_t n = space.size();
  const FeatureSet& features = *space.features();

  std::vector<double> r_in(n);
  {
    TableRiskEvaluator eval(features, Domain(dec.label_space, dec.base_id, dec.components.front()),
                            loss);
    space.for_each([&](std::size_t i, const std::vector<Label>& a) { r_in[i] = eval(a).r_in; });
  }
  std::vector<std::vector<double>> r_q(dec.components.size(), std::vector<double>(n));
  for (std::size_t j = 0; j < dec.components.size(); ++j) {
    TableRiskEvaluator eval(features, Domain(dec.label_space, dec.base_id, dec.components[j]), loss);
    space.for_each([&](std::size_t i, const std::vector<Label>& a) { r_q[j][i] = eval(a).r_out; });
  }

  double total = 0.0;
  for (double l : dec.lambdas) total += l;
  std::vector<double> r_d(n);
  for (std::size_t i = 0; i < n; ++i) {
    KahanSum s;
    s.add((1.0 - total) * r_in[i]);
    for (std::size_t j = 0; j < r_q.size(); ++j) s.add(dec.lambdas[j] * r_q[j][i]);
    r_d[i] = s.value();
  }

  const auto lhs = argmin_set(r_d);
  std::set<std::size_t> rhs = argmin_set(r_in);
  for (const auto& q : r_q) {
    const auto aq = argmin_set(q);
    std::set<std::size_t> keep;
    std::set_intersection(rhs.begin(), rhs.end(), aq.begin(), aq.end(),
                          std::inserter(keep, keep.begin()));
    rhs = std::move(keep);
  }
  return lhs == rhs;
}

double overlap_constant(const Loss& loss, double alpha) {
  const int k = loss.k();
  double c = std::numeric_limits<double>::infinity();
  for (Label y1 = 1; y1 <= k + 1; ++y1) {
    double id_min = std::numeric_limits<double>::infinity();
    for (Label y2 = 1; y2 <= k; ++y2) id_min = std::min(id_min, loss(y1, y2));
    c = std::min(c, (1.0 - alpha) * id_min + alpha * loss(y1, k + 1));
  }
  return c;
}

double overlap_lower_bound(const Domain& domain, double alpha, const Loss& loss) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (!domain.id().is_discrete() || !domain.ood().is_discrete())
    throw UnsupportedError("overlap bound is instantiated for discrete domains");
  if (loss.k() != domain.k()) throw ArgumentError("loss and domain disagree on k");

  std::map<Point, double> f_in;
  for (const auto& a : domain.id().discrete().atoms()) f_in[a.point] += a.mass;
  std::vector<std::pair<double, double>> shared;
  for (const auto& a : domain.ood().discrete().atoms()) {
    auto it = f_in.find(a.point);
    if (a.mass > 0.0 && it != f_in.end() && it->second > 0.0) shared.emplace_back(it->second, a.mass);
  }
  if (shared.empty()) return 0.0;

  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& [fi, fo] : shared) smallest = std::min({smallest, fi, fo});
  const double m0 = std::ceil(1.0 / smallest - 1e-9);
  const double threshold = 1.0 / m0 - 1e-15;
  double measure = 0.0;
  for (const auto& [fi, fo] : shared)
    if (fi >= threshold && fo >= threshold) measure += 1.0;
  return overlap_constant(loss, alpha) / m0 * measure;
}

}  // namespace oodlab
