#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "oodlab/core.hpp"

namespace oodlab {

struct Atom {
  Point point;
  double mass = 0.0;
};

class DiscreteDistribution {
 public:
  DiscreteDistribution() = default;
  explicit DiscreteDistribution(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t dimension() const { return atoms_.empty() ? 0 : atoms_.front().point.size(); }

 private:
  std::vector<Atom> atoms_;
};

/// Closed axis-aligned box [lo, hi] with lo < hi in every coordinate.
struct Rect {
  std::vector<double> lo;
  std::vector<double> hi;

  std::size_t dimension() const { return lo.size(); }
  double volume() const;
  bool contains(std::span<const double> x) const;
};

struct RectComponent {
  Rect rect;
  double weight = 0.0;
};

class UniformRectMixture {
 public:
  UniformRectMixture() = default;
  explicit UniformRectMixture(std::vector<RectComponent> components);

  const std::vector<RectComponent>& components() const { return components_; }
  std::size_t dimension() const {
    return components_.empty() ? 0 : components_.front().rect.dimension();
  }
  double density(std::span<const double> x) const;

 private:
  std::vector<RectComponent> components_;
};

struct LabeledPoint {
  Point x;
  Label y = 0;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

using LabeledSample = std::vector<LabeledPoint>;

/// A marginal plus one deterministic label per atom or rectangle component.
class JointDistribution {
 public:
  using Marginal = std::variant<DiscreteDistribution, UniformRectMixture>;

  JointDistribution() = default;
  JointDistribution(Marginal marginal, std::vector<Label> labels);

  static JointDistribution point_mass(Point p, Label y);

  bool is_discrete() const { return std::holds_alternative<DiscreteDistribution>(marginal_); }
  const DiscreteDistribution& discrete() const { return std::get<DiscreteDistribution>(marginal_); }
  const UniformRectMixture& rects() const { return std::get<UniformRectMixture>(marginal_); }
  const Marginal& marginal() const { return marginal_; }
  const std::vector<Label>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dimension() const;

  /// Mass (or mixture weight) of atom/component i.
  double weight(std::size_t i) const;

  friend bool operator==(const JointDistribution& a, const JointDistribution& b);

 private:
  Marginal marginal_;
  std::vector<Label> labels_;
};

/// Mixture (1 - pi_out) D_ID + pi_out D_OOD over features x {1..k+1}.
class Domain {
 public:
  Domain(LabelSpace labels, JointDistribution id, JointDistribution ood, double pi_out = 0.0);

  const LabelSpace& label_space() const { return label_space_; }
  const JointDistribution& id() const { return id_; }
  const JointDistribution& ood() const { return ood_; }
  double pi_out() const { return pi_out_; }
  int k() const { return label_space_.k(); }

  /// Density of the mixed marginal at x w.r.t. the base measure
  /// (Lebesgue for rectangles, counting for atoms).
  double mixed_density(std::span<const double> x) const;

 private:
  LabelSpace label_space_;
  JointDistribution id_;
  JointDistribution ood_;
  double pi_out_;
};

/// D^alpha := (1 - alpha) D_ID + alpha D_OOD.
Domain mix_alpha(const Domain& domain, double alpha);

/// Base-measure size of {x : f_I(x) > 0 and f_O(x) > 0}.
double overlap_measure(const Domain& domain);

/// Euclidean set distance between the ID and OOD supports.
double support_distance(const Domain& domain);

LabeledSample sample(const JointDistribution& joint, std::size_t n, std::uint64_t seed);

/// Ten uniform ID classes on [d_c, d_c + 4] x [1, 5] with
/// d_c = 5 + gap_ii (c - 1) + 4 (c - 2), and a uniform OOD slab on
/// [d_1 - 1, d_10 + 5] x [5 + gap_io, 10 + gap_io]. pi_out is left at 0.
Domain make_benchmark_domain(double gap_ii, double gap_io);

/// Left edge d_c of benchmark class c (1-based).
double benchmark_class_offset(double gap_ii, int c);

struct DensitySpaceSpec {
  enum class Base { discrete, lebesgue };

  Base base = Base::discrete;
  /// Discrete base measure: atoms carry the measure weight of each point.
  DiscreteDistribution discrete_measure;
  /// Lebesgue base measure restricted to these boxes.
  std::vector<Rect> lebesgue_support;
  double bound_b = 2.0;
};

/// True when 0.5 D_XI + 0.5 D_XO has a density f with 1/b <= f <= b on the
/// support of the base measure and no mass outside it.
bool satisfies_density_bound(const Domain& domain, const DensitySpaceSpec& spec);

/// Draws m points from the base measure normalized to a probability.
std::vector<Point> sample_base_measure(const DensitySpaceSpec& spec, std::size_t m,
                                       std::uint64_t seed);

struct OodDecomposition {
  OodDecomposition(LabelSpace labels, JointDistribution base, std::vector<JointDistribution> qs,
                   std::vector<double> lambdas);

  LabelSpace label_space;
  JointDistribution base_id;
  std::vector<JointDistribution> components;
  std::vector<double> lambdas;

  /// (1 - sum lambda) base_id + sum lambda_j Q_j. The OOD part is the
  /// normalized component mixture and pi_out is sum lambda. Discrete only.
  Domain domain() const;
};

/// Visits the cells of the arrangement generated by every rectangle edge.
/// Each cell is reported by its centre and volume; densities of uniform
/// components are constant across a cell interior.
template <class Fn>
void for_each_arrangement_cell(const std::vector<const Rect*>& rects, Fn&& fn);

}  // namespace oodlab

#include "oodlab/detail/arrangement.hpp"
