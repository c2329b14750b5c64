#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oodlab/conditions.hpp"
#include "oodlab/learners.hpp"
#include "oodlab/serialization.hpp"

namespace oodlab {

enum class Scale { desk, paper };

/// Built-in domains: overlap_two_atom, separate_two_atom, benchmark (with the
/// given gaps). Throws ArgumentError for other names.
Domain named_domain(const std::string& name, double gap_ii = 20.0, double gap_io = 100.0);

/// Seeds 1..count.
std::vector<std::uint64_t> seed_range(std::size_t count, std::uint64_t first = 1);

// ---------------------------------------------------------------------------

struct Figure1Config {
  double gap_ii = 20.0;
  double gap_io = 100.0;
  std::vector<std::size_t> n_list{1500, 2000, 2500};
  std::vector<std::uint64_t> seeds = seed_range(5);
  std::vector<double> alphas = uniform_alpha_grid();
  PipelineConfig pipeline = default_pipeline(Scale::desk);
  /// Midpoint cells per axis per rectangle when integrating dashed risks.
  int eval_cells = 48;
  int jobs = 0;

  static PipelineConfig default_pipeline(Scale scale);
  static Figure1Config for_scale(Scale scale, double gap_io);

  Json to_json() const;
  /// Overrides the fields present in j.
  void merge(const Json& j);
};

struct DashedCurve {
  std::string curve_id;
  std::size_t n = 0;
  AlgorithmRisk risk;
};

struct Figure1Result {
  Figure1Config config;
  std::vector<double> bayes;  // per alpha
  std::vector<DashedCurve> dashed;
  std::vector<double> lambdas;  // per (n, seed), row-major

  /// alpha,curve_id,value,std
  CsvTable csv() const;
};

inline constexpr const char* kBayesCurveId = "bayes_inf_surrogate";

/// Solid line = Bayes alpha-risk surrogate; dashed lines = the FCNN plus
/// free-energy pipeline, one per n, averaged over seeds. Seed s draws the
/// first n points of the ID stream s and trains and splits with seed s.
Figure1Result figure1(const Figure1Config& cfg);

/// One result per gap_io. The ID distribution does not depend on gap_io, so
/// each (n, seed) network is trained once and evaluated on every panel.
std::vector<Figure1Result> figure1_panels(const Figure1Config& cfg, const std::vector<double>& gap_ios);

/// max over the grid of |dashed - solid| for one curve.
double max_deviation(const DashedCurve& c, const std::vector<double>& bayes);

// ---------------------------------------------------------------------------

struct ImpossibilityReport {
  std::vector<double> alphas;
  std::vector<double> inf_curve;
  std::vector<double> linear_form;  // (1-a) inf R^in + a inf R^out
  ConditionReport linear;
  /// sup over alpha of R^alpha(h) - inf R^alpha, per enumerated table.
  std::vector<double> sup_gaps;

  Json to_json() const;
};

ImpossibilityReport demo_impossibility_overlap(const std::vector<double>& alphas = uniform_alpha_grid());

// ---------------------------------------------------------------------------

struct SeparateConfig {
  std::size_t x_size = 50;
  std::size_t id_atoms = 25;
  std::vector<std::size_t> n_list{10, 50, 200, 2000};
  std::vector<std::uint64_t> seeds = seed_range(100);
  std::vector<double> alphas = uniform_alpha_grid();
  std::uint64_t domain_seed = 7;
  int jobs = 0;

  Json to_json() const;
};

/// Union of the ID and OOD atom locations of a discrete domain, in order of
/// first appearance.
FeatureSetPtr make_feature_set(const Domain& domain);

/// Random separate finite-X domain: x_size distinct integer points in the
/// plane, the first id_atoms carry ID label 1, the rest are OOD.
Domain random_separate_domain(std::size_t x_size, std::size_t id_atoms, std::uint64_t seed);

struct SeparateReport {
  SeparateConfig config;
  ConvergenceReport convergence;
  bool r_out_always_zero = true;

  /// n,alpha,mean,std
  CsvTable csv() const;
  Json to_json() const;
};

SeparateReport demo_separate_learnable(const SeparateConfig& cfg);

// ---------------------------------------------------------------------------

struct FiniteIdConfig {
  std::size_t m_distributions = 3;
  double separation = 5.0;
  std::size_t anchor_size = 500;
  std::vector<std::size_t> n_list{20, 100, 500};
  std::size_t trials = 200;
  std::uint64_t seed = 11;
  double bandwidth = 0.0;  // <= 0: median heuristic
  int jobs = 0;

  Json to_json() const;
};

struct SelectorRow {
  std::size_t n = 0;
  std::size_t trial = 0;
  std::size_t selected = 0;
  std::size_t truth = 0;
};

struct FiniteIdReport {
  FiniteIdConfig config;
  double bandwidth = 0.0;
  std::vector<SelectorRow> rows;
  std::vector<double> misselection;  // per n
  std::vector<RiskPair> mean_risk;  // per n, end to end
  double min_anchor_distance = 0.0;

  /// n,trial,selected,truth
  CsvTable csv() const;
  Json to_json() const;
};

/// m well-separated discrete ID distributions (two labels each) sharing one
/// far OOD atom set; index i is centred at (i * (separation + 2), 0).
std::vector<Domain> finite_id_domains(std::size_t m, double separation);

FiniteIdReport demo_finite_id_space(const FiniteIdConfig& cfg);

// ---------------------------------------------------------------------------

struct ConstrainedConfig {
  std::size_t n = 1000;
  std::size_t m = 1000;
  std::vector<std::uint64_t> seeds = seed_range(5);
  std::vector<double> alphas = uniform_alpha_grid();
  double bound_b = 2.0;
  bool overlap = false;

  Json to_json() const;
};

struct ConstrainedReport {
  ConstrainedConfig config;
  bool realizable = false;
  bool density_bounded = false;
  bool infeasible = false;
  std::string message;
  AlgorithmRisk risk;

  Json to_json() const;
};

/// Twelve points on a grid: six ID atoms (labels 1, 2) and six OOD atoms,
/// pi_out = 1/2, density bounded by 2 w.r.t. the uniform counting measure.
/// With overlap the first ID point also carries OOD mass.
Domain constrained_demo_domain(bool overlap, DensitySpaceSpec* spec = nullptr);

ConstrainedReport demo_constrained_erm(const ConstrainedConfig& cfg);

}  // namespace oodlab
