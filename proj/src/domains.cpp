#include "oodlab/domains.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace oodlab {

namespace {

constexpr double kMassTolerance = 1e-12;

bool same_point(const Point& a, const Point& b) { return a == b; }

double rect_gap(const Rect& a, const Rect& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.dimension(); ++j) {
    double g = std::max({0.0, b.lo[j] - a.hi[j], a.lo[j] - b.hi[j]});
    s += g * g;
  }
  return std::sqrt(s);
}

double point_rect_gap(const Point& p, const Rect& r) {
  double s = 0.0;
  for (std::size_t j = 0; j < r.dimension(); ++j) {
    double g = std::max({0.0, r.lo[j] - p[j], p[j] - r.hi[j]});
    s += g * g;
  }
  return std::sqrt(s);
}

std::vector<const Rect*> positive_rects(const UniformRectMixture& m) {
  std::vector<const Rect*> out;
  for (const auto& c : m.components())
    if (c.weight > 0.0) out.push_back(&c.rect);
  return out;
}

bool inside_any(const std::vector<const Rect*>& rects, std::span<const double> x) {
  return std::any_of(rects.begin(), rects.end(), [&](const Rect* r) { return r->contains(x); });
}

double atom_mass_at(const DiscreteDistribution& d, std::span<const double> x) {
  for (const auto& a : d.atoms())
    if (std::equal(a.point.begin(), a.point.end(), x.begin(), x.end())) return a.mass;
  return 0.0;
}

double marginal_density(const JointDistribution& j, std::span<const double> x) {
  if (j.is_discrete()) return atom_mass_at(j.discrete(), x);
  return j.rects().density(x);
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ArgumentError("discrete distribution needs at least one atom");
  const std::size_t d = atoms_.front().point.size();
  KahanSum total;
  for (const auto& a : atoms_) {
    if (a.point.size() != d) throw ArgumentError("atoms have inconsistent dimension");
    if (!(a.mass >= 0.0) || !std::isfinite(a.mass)) throw ArgumentError("atom mass must be >= 0");
    total.add(a.mass);
  }
  if (std::abs(total.value() - 1.0) > kMassTolerance)
    throw ArgumentError("atom masses must sum to 1");
  std::set<Point> seen;
  for (const auto& a : atoms_)
    if (!seen.insert(a.point).second) throw ArgumentError("atom points must be distinct");
}

double Rect::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < lo.size(); ++j) v *= hi[j] - lo[j];
  return v;
}

bool Rect::contains(std::span<const double> x) const {
  for (std::size_t j = 0; j < lo.size(); ++j)
    if (x[j] < lo[j] || x[j] > hi[j]) return false;
  return true;
}

UniformRectMixture::UniformRectMixture(std::vector<RectComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw ArgumentError("rectangle mixture needs at least one component");
  const std::size_t d = components_.front().rect.dimension();
  KahanSum total;
  for (const auto& c : components_) {
    if (c.rect.lo.size() != d || c.rect.hi.size() != d)
      throw ArgumentError("rectangles have inconsistent dimension");
    for (std::size_t j = 0; j < d; ++j)
      if (!(c.rect.lo[j] < c.rect.hi[j])) throw ArgumentError("degenerate rectangle");
    if (!(c.weight >= 0.0)) throw ArgumentError("component weight must be >= 0");
    total.add(c.weight);
  }
  if (std::abs(total.value() - 1.0) > kMassTolerance)
    throw ArgumentError("component weights must sum to 1");
}

double UniformRectMixture::density(std::span<const double> x) const {
  double f = 0.0;
  for (const auto& c : components_)
    if (c.weight > 0.0 && c.rect.contains(x)) f += c.weight / c.rect.volume();
  return f;
}

JointDistribution::JointDistribution(Marginal marginal, std::vector<Label> labels)
    : marginal_(std::move(marginal)), labels_(std::move(labels)) {
  const std::size_t n = std::visit(
      [](const auto& m) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, DiscreteDistribution>)
          return m.atoms().size();
        else
          return m.components().size();
      },
      marginal_);
  if (n != labels_.size()) throw ArgumentError("exactly one label per atom/component required");
  for (Label y : labels_)
    if (y < 1) throw ArgumentError("labels are 1-based");
}

JointDistribution JointDistribution::point_mass(Point p, Label y) {
  return JointDistribution(DiscreteDistribution({Atom{std::move(p), 1.0}}), {y});
}

std::size_t JointDistribution::dimension() const {
  return is_discrete() ? discrete().dimension() : rects().dimension();
}

double JointDistribution::weight(std::size_t i) const {
  return is_discrete() ? discrete().atoms()[i].mass : rects().components()[i].weight;
}

bool operator==(const JointDistribution& a, const JointDistribution& b) {
  if (a.labels_ != b.labels_ || a.is_discrete() != b.is_discrete()) return false;
  if (a.is_discrete()) {
    const auto& x = a.discrete().atoms();
    const auto& y = b.discrete().atoms();
    return std::equal(x.begin(), x.end(), y.begin(), y.end(), [](const Atom& p, const Atom& q) {
      return p.point == q.point && p.mass == q.mass;
    });
  }
  const auto& x = a.rects().components();
  const auto& y = b.rects().components();
  return std::equal(x.begin(), x.end(), y.begin(), y.end(),
                    [](const RectComponent& p, const RectComponent& q) {
                      return p.rect.lo == q.rect.lo && p.rect.hi == q.rect.hi &&
                             p.weight == q.weight;
                    });
}

Domain::Domain(LabelSpace labels, JointDistribution id, JointDistribution ood, double pi_out)
    : label_space_(labels), id_(std::move(id)), ood_(std::move(ood)), pi_out_(pi_out) {
  if (!(pi_out_ >= 0.0 && pi_out_ <= 1.0)) throw ArgumentError("pi_out must lie in [0, 1]");
  for (Label y : id_.labels())
    if (!label_space_.is_id(y)) throw ArgumentError("ID joint carries a non-ID label");
  for (Label y : ood_.labels())
    if (y != label_space_.ood()) throw ArgumentError("OOD joint must be labeled k+1");
  if (id_.dimension() != ood_.dimension())
    throw ArgumentError("ID and OOD features differ in dimension");
}

double Domain::mixed_density(std::span<const double> x) const {
  return (1.0 - pi_out_) * marginal_density(id_, x) + pi_out_ * marginal_density(ood_, x);
}

Domain mix_alpha(const Domain& domain, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
  return Domain(domain.label_space(), domain.id(), domain.ood(), alpha);
}

double overlap_measure(const Domain& domain) {
  const auto& id = domain.id();
  const auto& ood = domain.ood();
  if (id.is_discrete() != ood.is_discrete())
    throw UnsupportedError("overlap needs both marginals of the same kind");

  if (id.is_discrete()) {
    double count = 0.0;
    for (const auto& a : id.discrete().atoms()) {
      if (a.mass <= 0.0) continue;
      if (atom_mass_at(ood.discrete(), a.point) > 0.0) count += 1.0;
    }
    return count;
  }

  auto id_rects = positive_rects(id.rects());
  auto ood_rects = positive_rects(ood.rects());
  std::vector<const Rect*> all = id_rects;
  all.insert(all.end(), ood_rects.begin(), ood_rects.end());
  KahanSum area;
  for_each_arrangement_cell(all, [&](const std::vector<double>& centre, double volume) {
    if (inside_any(id_rects, centre) && inside_any(ood_rects, centre)) area.add(volume);
  });
  return area.value();
}

double support_distance(const Domain& domain) {
  const auto& id = domain.id();
  const auto& ood = domain.ood();
  double best = std::numeric_limits<double>::infinity();

  auto for_each_support = [](const JointDistribution& j, auto&& on_point, auto&& on_rect) {
    if (j.is_discrete()) {
      for (const auto& a : j.discrete().atoms())
        if (a.mass > 0.0) on_point(a.point);
    } else {
      for (const auto& c : j.rects().components())
        if (c.weight > 0.0) on_rect(c.rect);
    }
  };

  for_each_support(
      id,
      [&](const Point& p) {
        for_each_support(
            ood, [&](const Point& q) { best = std::min(best, distance(p, q)); },
            [&](const Rect& r) { best = std::min(best, point_rect_gap(p, r)); });
      },
      [&](const Rect& r) {
        for_each_support(
            ood, [&](const Point& q) { best = std::min(best, point_rect_gap(q, r)); },
            [&](const Rect& s) { best = std::min(best, rect_gap(r, s)); });
      });
  return best;
}

LabeledSample sample(const JointDistribution& joint, std::size_t n, std::uint64_t seed) {
  LabeledSample out;
  out.reserve(n);
  if (n == 0) return out;
  Rng rng(seed);

  std::vector<double> cumulative(joint.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i) cumulative[i] = acc += joint.weight(i);

  auto pick = [&]() {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cumulative.begin());
    if (i >= cumulative.size()) i = cumulative.size() - 1;
    // Skip zero-weight entries that share a cumulative value.
    while (joint.weight(i) <= 0.0 && i + 1 < cumulative.size()) ++i;
    return i;
  };

  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = pick();
    if (joint.is_discrete()) {
      out.push_back({joint.discrete().atoms()[i].point, joint.labels()[i]});
    } else {
      const Rect& r = joint.rects().components()[i].rect;
      Point x(r.dimension());
      for (std::size_t j = 0; j < x.size(); ++j) x[j] = rng.uniform(r.lo[j], r.hi[j]);
      out.push_back({std::move(x), joint.labels()[i]});
    }
  }
  return out;
}

double benchmark_class_offset(double gap_ii, int c) {
  return 5.0 + gap_ii * (c - 1) + 4.0 * (c - 2);
}

Domain make_benchmark_domain(double gap_ii, double gap_io) {
  constexpr int kClasses = 10;
  std::vector<RectComponent> id;
  std::vector<Label> labels;
  for (int c = 1; c <= kClasses; ++c) {
    const double d = benchmark_class_offset(gap_ii, c);
    id.push_back({Rect{{d, 1.0}, {d + 4.0, 5.0}}, 1.0 / kClasses});
    labels.push_back(c);
  }
  for (std::size_t a = 0; a < id.size(); ++a) {
    for (std::size_t b = a + 1; b < id.size(); ++b) {
      const Rect& p = id[a].rect;
      const Rect& q = id[b].rect;
      const bool disjoint = p.hi[0] < q.lo[0] || q.hi[0] < p.lo[0];
      if (!disjoint) {
        std::ostringstream msg;
        msg << "benchmark classes " << a + 1 << " and " << b + 1 << " overlap (gap_ii=" << gap_ii
            << ")";
        throw ConstructionError(msg.str());
      }
    }
  }
  const double d1 = benchmark_class_offset(gap_ii, 1);
  const double d10 = benchmark_class_offset(gap_ii, kClasses);
  RectComponent out{Rect{{d1 - 1.0, 5.0 + gap_io}, {d10 + 5.0, 10.0 + gap_io}}, 1.0};

  return Domain(LabelSpace(kClasses), JointDistribution(UniformRectMixture(std::move(id)), labels),
                JointDistribution(UniformRectMixture({out}), {kClasses + 1}), 0.0);
}

bool satisfies_density_bound(const Domain& domain, const DensitySpaceSpec& spec) {
  const double b = spec.bound_b;
  if (!(b >= 1.0)) throw ArgumentError("density bound b must be >= 1");
  const double lo = 1.0 / b * (1.0 - 1e-12);
  const double hi = b * (1.0 + 1e-12);

  if (spec.base == DensitySpaceSpec::Base::discrete) {
    if (!domain.id().is_discrete() || !domain.ood().is_discrete())
      throw UnsupportedError("discrete base measure needs discrete marginals");
    const auto& mu = spec.discrete_measure.atoms();
    auto in_support = [&](const Point& p) {
      return std::any_of(mu.begin(), mu.end(),
                         [&](const Atom& a) { return a.mass > 0.0 && same_point(a.point, p); });
    };
    for (const auto* j : {&domain.id(), &domain.ood()})
      for (const auto& a : j->discrete().atoms())
        if (a.mass > 0.0 && !in_support(a.point)) return false;
    for (const auto& a : mu) {
      if (a.mass <= 0.0) continue;
      const double f = (0.5 * atom_mass_at(domain.id().discrete(), a.point) +
                        0.5 * atom_mass_at(domain.ood().discrete(), a.point)) /
                       a.mass;
      if (f < lo || f > hi) return false;
    }
    return true;
  }

  if (domain.id().is_discrete() || domain.ood().is_discrete())
    throw UnsupportedError("Lebesgue base measure needs rectangle marginals");
  std::vector<const Rect*> support;
  for (const auto& r : spec.lebesgue_support) support.push_back(&r);
  auto id_rects = positive_rects(domain.id().rects());
  auto ood_rects = positive_rects(domain.ood().rects());
  std::vector<const Rect*> all = support;
  all.insert(all.end(), id_rects.begin(), id_rects.end());
  all.insert(all.end(), ood_rects.begin(), ood_rects.end());
  bool ok = true;
  for_each_arrangement_cell(all, [&](const std::vector<double>& c, double) {
    const double f =
        0.5 * domain.id().rects().density(c) + 0.5 * domain.ood().rects().density(c);
    if (inside_any(support, c)) {
      if (f < lo || f > hi) ok = false;
    } else if (f > 0.0) {
      ok = false;
    }
  });
  return ok;
}

std::vector<Point> sample_base_measure(const DensitySpaceSpec& spec, std::size_t m,
                                       std::uint64_t seed) {
  std::vector<Point> out;
  out.reserve(m);
  if (spec.base == DensitySpaceSpec::Base::discrete) {
    const auto& atoms = spec.discrete_measure.atoms();
    std::vector<Label> labels(atoms.size(), 1);
    for (auto& s : sample(JointDistribution(spec.discrete_measure, labels), m, seed))
      out.push_back(std::move(s.x));
    return out;
  }
  // Boxes are assumed disjoint; each is chosen in proportion to its volume.
  double total = 0.0;
  for (const auto& r : spec.lebesgue_support) total += r.volume();
  std::vector<RectComponent> comps;
  for (const auto& r : spec.lebesgue_support) comps.push_back({r, r.volume() / total});
  std::vector<Label> labels(comps.size(), 1);
  JointDistribution uniform(UniformRectMixture(std::move(comps)), labels);
  for (auto& s : sample(uniform, m, seed)) out.push_back(std::move(s.x));
  return out;
}

OodDecomposition::OodDecomposition(LabelSpace labels, JointDistribution base,
                                   std::vector<JointDistribution> qs, std::vector<double> lams)
    : label_space(labels),
      base_id(std::move(base)),
      components(std::move(qs)),
      lambdas(std::move(lams)) {
  if (components.empty()) throw ArgumentError("decomposition needs at least one component");
  if (components.size() != lambdas.size()) throw ArgumentError("one lambda per component");
  double total = 0.0;
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ArgumentError("lambdas must be nonnegative");
    total += l;
  }
  if (!(total < 1.0)) throw ArgumentError("lambdas must sum to strictly less than 1");
  for (const auto& q : components)
    for (Label y : q.labels())
      if (y != label_space.ood()) throw ArgumentError("decomposition components must be OOD");
  for (Label y : base_id.labels())
    if (!label_space.is_id(y)) throw ArgumentError("decomposition base must be ID-labeled");
}

Domain OodDecomposition::domain() const {
  const double total = std::accumulate(lambdas.begin(), lambdas.end(), 0.0);
  if (total <= 0.0) return Domain(label_space, base_id, components.front(), 0.0);

  for (const auto& q : components)
    if (!q.is_discrete()) throw UnsupportedError("decomposition mixing needs discrete components");
  std::map<Point, double> merged;
  std::vector<Point> order;
  for (std::size_t j = 0; j < components.size(); ++j) {
    for (const auto& a : components[j].discrete().atoms()) {
      auto [it, fresh] = merged.try_emplace(a.point, 0.0);
      if (fresh) order.push_back(a.point);
      it->second += lambdas[j] / total * a.mass;
    }
  }
  std::vector<Atom> atoms;
  for (const auto& p : order) atoms.push_back({p, merged[p]});
  // Renormalize away accumulated rounding.
  double s = 0.0;
  for (const auto& a : atoms) s += a.mass;
  for (auto& a : atoms) a.mass /= s;
  std::vector<Label> labels(atoms.size(), label_space.ood());
  return Domain(label_space, base_id, JointDistribution(DiscreteDistribution(atoms), labels),
                total);
}

}  // namespace oodlab
