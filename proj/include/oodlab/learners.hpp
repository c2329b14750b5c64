#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oodlab/risk.hpp"

namespace oodlab {

// ---------------------------------------------------------------------------
// Finite-feature-space learners

/// Binary (k = 1) table: label 1 iff the nearest sampled point is closer than
/// half the minimum pairwise distance d0 of the feature set, else 2.
TableHypothesis nn_threshold(const LabeledSample& s, const FeatureSetPtr& features);

/// (1/n) sum l(h(x_i), y_i) for a table assignment.
double empirical_risk(const TableHypothesis& h, const LabeledSample& s, const Loss& loss);

/// Empirical risk minimizer; ties go to the first table in enumeration order.
/// All-table spaces are minimized pointwise, which picks the same table.
TableHypothesis erm(const TableSpace& space, const LabeledSample& s, const Loss& loss);

/// ERM by exhaustive enumeration regardless of space structure.
TableHypothesis erm_enumerate(const TableSpace& space, const LabeledSample& s, const Loss& loss);

/// Among tables with zero empirical ID loss, minimizes
/// (1/m) sum l(h(u_j), k+1) over the unlabeled points. Throws InfeasibleError
/// when no table fits the sample.
TableHypothesis constrained_erm(const TableSpace& space, const LabeledSample& s,
                                const std::vector<Point>& unlabeled, const Loss& loss);

TableHypothesis constrained_erm_enumerate(const TableSpace& space, const LabeledSample& s,
                                          const std::vector<Point>& unlabeled, const Loss& loss);

// ---------------------------------------------------------------------------
// MMD anchor selection

/// Plug-in (V-statistic) squared MMD with the kernel
/// exp(-|x - x'|^2 / (2 bandwidth^2)) * [y == y'].
double mmd2(const LabeledSample& a, const LabeledSample& b, double bandwidth);

/// Median pairwise distance of the pooled points; falls back to the median of
/// the positive distances, then to 1, when the median is zero.
double median_heuristic_bandwidth(const std::vector<const LabeledSample*>& pools);

struct MmdAnchor {
  LabeledSample sample;
  Algorithm algorithm;
  std::string name;
};

class MmdAnchors {
 public:
  /// bandwidth <= 0 selects the median heuristic over the pooled anchors.
  MmdAnchors(std::vector<MmdAnchor> entries, double bandwidth = 0.0);

  const std::vector<MmdAnchor>& entries() const { return entries_; }
  double bandwidth() const { return bandwidth_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<MmdAnchor> entries_;
  double bandwidth_;
};

struct Selection {
  std::size_t index = 0;
  double mmd2 = 0.0;
};

/// Anchor minimizing mmd2 against s; ties go to the smallest index.
Selection mmd_select(const LabeledSample& s, const MmdAnchors& anchors);

/// A(S) = A_i(S) with i the selected anchor.
Algorithm mmd_selector_algorithm(std::shared_ptr<const MmdAnchors> anchors);

// ---------------------------------------------------------------------------
// FCNN training and free-energy detection

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_hat = 1e-8;
};

struct TrainConfig {
  FcnnArchitecture arch{{2, 100, 100, 10}, Activation::sigmoid};
  double learning_rate = 1e-3;
  int iterations = 10000;
  /// 0 means full batch.
  std::size_t batch = 0;
  AdamConfig adam;
  std::uint64_t seed = 0;
  /// Input map fitted on the training inputs: none, per-feature z-score, or
  /// centring plus one common scale for all features.
  enum class InputScaling { none, per_feature, isotropic };
  InputScaling input_scaling = InputScaling::per_feature;

  void validate() const;
};

/// Weights and biases uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], drawn
/// layer by layer in row-major order.
FcnnParams init_params(const FcnnArchitecture& arch, std::uint64_t seed);

/// Adam on mean squared error to one-hot targets. Throws DivergenceError on a
/// non-finite loss.
Network train_fcnn(const TrainConfig& cfg, const LabeledSample& s);

/// Mean squared error of the network against one-hot targets.
double training_loss(const Network& net, const LabeledSample& s);

/// Energy-score detector whose threshold is the empirical (1 - tpr) quantile
/// of the holdout scores, so at least ceil(tpr * m) holdout points are ID.
ScoreClassifier free_energy_detector(const Network& net, const std::vector<Point>& holdout,
                                     double tpr, double temperature = 1.0);

struct PipelineConfig {
  TrainConfig train;
  double tpr = 0.95;
  double holdout_fraction = 0.1;
  double temperature = 1.0;
  std::uint64_t split_seed = 0;
  /// Replaces the calibrated threshold (e.g. -inf for an always-ID detector).
  std::optional<double> lambda_override;
};

struct PipelineModel {
  CompositeHypothesis hypothesis;
  Network network;
  double lambda = 0.0;
};

/// Trains the ID classifier on a seeded 90/10 split, calibrates the energy
/// detector on the holdout, and composes the two.
PipelineModel run_pipeline(const PipelineConfig& cfg, const LabeledSample& s, int k);

// ---------------------------------------------------------------------------
// Sweeps

struct ConvergenceRow {
  std::size_t n = 0;
  AlgorithmRisk risk;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
};

ConvergenceReport convergence_sweep(const Algorithm& alg, const Domain& domain,
                                    const std::vector<std::size_t>& n_list,
                                    const std::vector<std::uint64_t>& seeds,
                                    const std::vector<double>& alphas, const Loss& loss,
                                    const RiskEvaluation& how = RiskEvaluation::exact(),
                                    int jobs = 1);

}  // namespace oodlab
