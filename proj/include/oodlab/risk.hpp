#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "oodlab/domains.hpp"
#include "oodlab/hypotheses.hpp"

namespace oodlab {

/// Bounded loss table indexed (predicted, truth), zero exactly on the diagonal.
class Loss {
 public:
  explicit Loss(std::vector<std::vector<double>> table);
  static Loss zero_one(int k);

  double operator()(Label predicted, Label truth) const {
    return table_[predicted - 1][truth - 1];
  }
  int k() const { return static_cast<int>(table_.size()) - 1; }
  double bound() const { return bound_; }
  const std::vector<std::vector<double>>& table() const { return table_; }

 private:
  std::vector<std::vector<double>> table_;
  double bound_ = 0.0;
};

/// Partial risks of one hypothesis: R^in on the ID joint, R^out on the OOD joint.
struct RiskPair {
  double r_in = 0.0;
  double r_out = 0.0;

  /// R^alpha = (1 - alpha) R^in + alpha R^out.
  double at(double alpha) const { return (1.0 - alpha) * r_in + alpha * r_out; }
};

struct RiskBreakdown {
  double r_in = 0.0;
  double r_out = 0.0;
  std::vector<std::pair<double, double>> alpha_curve;
};

RiskBreakdown risk_breakdown(const RiskPair& r, const std::vector<double>& alphas);

/// Exact risk on a discrete joint: sum of mass * loss(h(x), y).
double risk_exact(const Hypothesis& h, const JointDistribution& joint, const Loss& loss);

/// R^in and R^out of h on a discrete domain.
RiskPair risk_pair_exact(const Hypothesis& h, const Domain& domain, const Loss& loss);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

McEstimate risk_mc(const Hypothesis& h, const JointDistribution& joint, const Loss& loss,
                   std::size_t n, std::uint64_t seed);

/// Midpoint-rule risk on a rectangle mixture with `cells` points per axis per
/// component; exact on discrete joints.
double risk_grid(const Hypothesis& h, const JointDistribution& joint, const Loss& loss, int cells);

/// Per-point cost tables so that table risks are sums of lookups.
class TableRiskEvaluator {
 public:
  TableRiskEvaluator(const FeatureSet& features, const Domain& domain, const Loss& loss);

  RiskPair operator()(const std::vector<Label>& assignment) const;
  double in_cost(std::size_t point, Label y) const { return in_[point][y - 1]; }
  double out_cost(std::size_t point, Label y) const { return out_[point][y - 1]; }

 private:
  std::vector<std::vector<double>> in_;
  std::vector<std::vector<double>> out_;
};

/// (R^in, R^out) of every member of the space, in enumeration order.
std::vector<RiskPair> table_risks(const TableSpace& space, const Domain& domain, const Loss& loss);

/// Two risks are treated as equal when within this absolute distance.
inline constexpr double kTieTolerance = 1e-12;

struct InfimumCertificate {
  double value = 0.0;
  std::vector<std::size_t> argmin_indices;
  std::vector<TableHypothesis> argmin;
};

/// Indices whose value is within kTieTolerance of the minimum.
InfimumCertificate certify_minimum(const TableSpace& space, const std::vector<double>& values);

InfimumCertificate inf_risk(const TableSpace& space, const Domain& domain, double alpha,
                            const Loss& loss);

/// Pointwise-optimal alpha-risk: integral over x of
/// min_y [(1-alpha) f_I(x) l(y, y_I(x)) + alpha f_O(x) l(y, k+1)],
/// evaluated cell by cell (rectangles) or atom by atom.
double bayes_alpha_risk(const Domain& domain, double alpha, const Loss& loss);

using Algorithm = std::function<Hypothesis(const LabeledSample&)>;

struct RiskEvaluation {
  enum class Mode { exact, grid, monte_carlo };
  Mode mode = Mode::exact;
  int grid_cells = 64;
  std::size_t mc_samples = 25000;
  std::uint64_t mc_seed = 0;

  static RiskEvaluation exact() { return {}; }
  static RiskEvaluation grid(int cells) { return {Mode::grid, cells, 0, 0}; }
  static RiskEvaluation monte_carlo(std::size_t n, std::uint64_t seed) {
    return {Mode::monte_carlo, 0, n, seed};
  }
};

RiskPair evaluate_risk_pair(const Hypothesis& h, const Domain& domain, const Loss& loss,
                            const RiskEvaluation& how);

struct AlphaStat {
  double alpha = 0.0;
  double mean = 0.0;
  double std = 0.0;
};

struct AlgorithmRisk {
  std::vector<std::uint64_t> seeds;
  std::vector<RiskPair> per_seed;
  std::vector<AlphaStat> rows;
  double mean_r_in = 0.0;
  double mean_r_out = 0.0;
};

/// Mean and sample standard deviation over seeds of R^alpha(A(S)) with
/// S ~ D_ID^n drawn from the seed.
AlgorithmRisk expected_algorithm_risk(const Algorithm& alg, const Domain& domain, std::size_t n,
                                      const std::vector<std::uint64_t>& seeds,
                                      const std::vector<double>& alphas, const Loss& loss,
                                      const RiskEvaluation& how = RiskEvaluation::exact(),
                                      int jobs = 1);

/// Summarizes per-seed risk pairs into alpha rows.
AlgorithmRisk summarize_risks(std::vector<std::uint64_t> seeds, std::vector<RiskPair> per_seed,
                              const std::vector<double>& alphas);

}  // namespace oodlab
