#include <algorithm>
#include <cmath>
#include <numeric>

#include "oodlab/learners.hpp"

namespace oodlab {

namespace {

Eigen::MatrixXd one_hot(const LabeledSample& s, int width) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s.size()), width);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i].y < 1 || s[i].y > width) throw ArgumentError("training label outside 1..l_g");
    t(static_cast<Eigen::Index>(i), s[i].y - 1) = 1.0;
  }
  return t;
}

struct AdamSlot {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
};

void adam_step(Eigen::MatrixXd& param, const Eigen::MatrixXd& grad, AdamSlot& slot,
               const AdamConfig& adam, double lr, int t) {
  slot.m = adam.beta1 * slot.m + (1.0 - adam.beta1) * grad;
  slot.v = adam.beta2 * slot.v + (1.0 - adam.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(adam.beta1, t);
  const double c2 = 1.0 - std::pow(adam.beta2, t);
  param.array() -= lr * (slot.m.array() / c1) / ((slot.v.array() / c2).sqrt() + adam.eps_hat);
}

}  // namespace

void TrainConfig::validate() const {
  arch.validate();
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");
  if (iterations < 0) throw ArgumentError("iteration count must be nonnegative");
}

FcnnParams init_params(const FcnnArchitecture& arch, std::uint64_t seed) {
  FcnnParams p = FcnnParams::zeros(arch);
  Rng rng(seed);
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(arch.widths[i]));
    auto& w = p.weights[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    for (Eigen::Index r = 0; r < p.biases[i].size(); ++r) p.biases[i](r) = rng.uniform(-bound, bound);
  }
  return p;
}

double training_loss(const Network& net, const LabeledSample& s) {
  std::vector<Point> xs;
  xs.reserve(s.size());
  for (const auto& d : s) xs.push_back(d.x);
  const Eigen::MatrixXd diff = net.outputs(xs) - one_hot(s, net.arch.output_dim());
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

Network train_fcnn(const TrainConfig& cfg, const LabeledSample& s) {
  cfg.validate();
  if (s.empty()) throw ArgumentError("training needs a nonempty sample");
  const auto& arch = cfg.arch;
  Network net(arch, init_params(arch, cfg.seed));
  const int d = arch.input_dim();
  for (const auto& p : s)
    if (static_cast<int>(p.x.size()) != d) throw ArgumentError("training input has wrong dimension");

  if (cfg.input_scaling != TrainConfig::InputScaling::none) {
    const double n = static_cast<double>(s.size());
    double pooled = 0.0;
    for (int j = 0; j < d; ++j) {
      double mean = 0.0;
      for (const auto& p : s) mean += p.x[j];
      mean /= n;
      double var = 0.0;
      for (const auto& p : s) var += (p.x[j] - mean) * (p.x[j] - mean);
      var /= n;
      pooled += var;
      net.shift[j] = mean;
      net.scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    if (cfg.input_scaling == TrainConfig::InputScaling::isotropic) {
      // Root-mean-square distance to the centroid.
      const double r = std::sqrt(pooled);
      for (int j = 0; j < d; ++j) net.scale[j] = r > 0.0 ? r : 1.0;
    }
  }
  if (cfg.iterations == 0) return net;

  std::vector<Point> xs;
  xs.reserve(s.size());
  for (const auto& p : s) xs.push_back(p.x);
  const Eigen::MatrixXd inputs = net.standardize(xs);
  const Eigen::MatrixXd targets = one_hot(s, arch.output_dim());

  const std::size_t layers = net.params.weights.size();
  std::vector<AdamSlot> w_slots(layers);
  std::vector<AdamSlot> b_slots(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    const auto& w = net.params.weights[i];
    w_slots[i] = {Eigen::MatrixXd::Zero(w.rows(), w.cols()), Eigen::MatrixXd::Zero(w.rows(), w.cols())};
    b_slots[i] = {Eigen::MatrixXd::Zero(w.rows(), 1), Eigen::MatrixXd::Zero(w.rows(), 1)};
  }

  const std::size_t n = s.size();
  const std::size_t batch = cfg.batch == 0 || cfg.batch >= n ? n : cfg.batch;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng shuffler(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t cursor = n;

  std::vector<Eigen::MatrixXd> acts(layers);  // post-activation of each hidden layer
  Eigen::MatrixXd x_batch;
  Eigen::MatrixXd t_batch;

  for (int it = 1; it <= cfg.iterations; ++it) {
    const Eigen::MatrixXd* x = &inputs;
    const Eigen::MatrixXd* t = &targets;
    if (batch < n) {
      if (cursor + batch > n) {
        std::shuffle(order.begin(), order.end(), shuffler.engine());
        cursor = 0;
      }
      x_batch.resize(static_cast<Eigen::Index>(batch), inputs.cols());
      t_batch.resize(static_cast<Eigen::Index>(batch), targets.cols());
      for (std::size_t r = 0; r < batch; ++r) {
        x_batch.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(order[cursor + r]));
        t_batch.row(static_cast<Eigen::Index>(r)) = targets.row(static_cast<Eigen::Index>(order[cursor + r]));
      }
      cursor += batch;
      x = &x_batch;
      t = &t_batch;
    }

    // Forward.
    const Eigen::MatrixXd* prev = x;
    for (std::size_t i = 0; i + 1 < layers; ++i) {
      Eigen::MatrixXd z = (*prev) * net.params.weights[i].transpose();
      z.rowwise() += net.params.biases[i].transpose();
      activate_inplace(arch.activation, z);
      acts[i] = std::move(z);
      prev = &acts[i];
    }
    Eigen::MatrixXd out = (*prev) * net.params.weights[layers - 1].transpose();
    out.rowwise() += net.params.biases[layers - 1].transpose();

    Eigen::MatrixXd delta = out - *t;
    const double loss = delta.squaredNorm() / static_cast<double>(delta.size());
    if (!std::isfinite(loss)) throw DivergenceError("training loss became non-finite");
    delta *= 2.0 / static_cast<double>(delta.size());

    // Backward, last layer first.
    for (std::size_t li = layers; li-- > 0;) {
      const Eigen::MatrixXd& input = li == 0 ? *x : acts[li - 1];
      Eigen::MatrixXd grad_w = delta.transpose() * input;
      Eigen::MatrixXd grad_b = delta.colwise().sum().transpose();
      Eigen::MatrixXd next_delta;
      if (li > 0) {
        next_delta = delta * net.params.weights[li];
        const Eigen::MatrixXd& a = acts[li - 1];
        if (arch.activation == Activation::sigmoid)
          next_delta.array() *= a.array() * (1.0 - a.array());
        else
          next_delta.array() *= (a.array() > 0.0).cast<double>();
      }
      adam_step(net.params.weights[li], grad_w, w_slots[li], cfg.adam, cfg.learning_rate, it);
      Eigen::MatrixXd b = net.params.biases[li];
      adam_step(b, grad_b, b_slots[li], cfg.adam, cfg.learning_rate, it);
      net.params.biases[li] = b;
      if (li > 0) delta = std::move(next_delta);
    }
  }
  return net;
}

ScoreClassifier free_energy_detector(const Network& net, const std::vector<Point>& holdout,
                                     double tpr, double temperature) {
  if (holdout.empty()) throw ArgumentError("detector calibration needs holdout points");
  if (!(tpr > 0.0 && tpr < 1.0)) throw ArgumentError("tpr must lie in (0, 1)");
  const ScoreKind kind = ScoreKind::energy(temperature);
  const Eigen::MatrixXd f = net.outputs(holdout);
  std::vector<double> scores(holdout.size());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    Eigen::VectorXd row = f.row(i).transpose();
    scores[static_cast<std::size_t>(i)] =
        score(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())), kind);
  }
  std::sort(scores.begin(), scores.end());
  // Smallest score whose empirical CDF reaches 1 - tpr.
  const double m = static_cast<double>(scores.size());
  const double rank = std::ceil((1.0 - tpr) * m - 1e-9);
  const std::size_t j = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return ScoreClassifier::unchecked(net, kind, scores[std::min(j, scores.size() - 1)]);
}

PipelineModel run_pipeline(const PipelineConfig& cfg, const LabeledSample& s, int k) {
  if (!(cfg.holdout_fraction > 0.0 && cfg.holdout_fraction < 1.0))
    throw ArgumentError("holdout fraction must lie in (0, 1)");
  if (s.size() < 2) throw ArgumentError("pipeline needs at least two samples");
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.split_seed);
  std::shuffle(order.begin(), order.end(), rng.engine());

  auto holdout_n = static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(s.size())));
  holdout_n = std::clamp<std::size_t>(holdout_n, 1, s.size() - 1);
  LabeledSample train;
  std::vector<Point> holdout;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < holdout_n)
      holdout.push_back(s[order[i]].x);
    else
      train.push_back(s[order[i]]);
  }

  Network net = train_fcnn(cfg.train, train);
  ScoreClassifier detector = free_energy_detector(net, holdout, cfg.tpr, cfg.temperature);
  if (cfg.lambda_override)
    detector = ScoreClassifier::unchecked(net, detector.kind(), *cfg.lambda_override);

  PipelineModel model;
  model.network = net;
  model.lambda = detector.lambda();
  model.hypothesis.h_in = NetworkClassifier(net, k);
  model.hypothesis.h_b = detector;
  model.hypothesis.k = k;
  return model;
}

}  // namespace oodlab
