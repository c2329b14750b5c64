#include "oodlab/fcnn.hpp"

#include <cmath>
#include <string>

namespace oodlab {

void FcnnArchitecture::validate() const {
  if (widths.size() < 3) throw ArgumentError("FCNN depth g must be at least 3");
  for (int w : widths)
    if (w < 1) throw ArgumentError("FCNN layer widths must be positive");
}

FcnnParams FcnnParams::zeros(const FcnnArchitecture& arch) {
  arch.validate();
  FcnnParams p;
  for (std::size_t i = 1; i < arch.widths.size(); ++i) {
    p.weights.push_back(Eigen::MatrixXd::Zero(arch.widths[i], arch.widths[i - 1]));
    p.biases.push_back(Eigen::VectorXd::Zero(arch.widths[i]));
  }
  return p;
}

void FcnnParams::check_shapes(const FcnnArchitecture& arch) const {
  arch.validate();
  const std::size_t layers = arch.widths.size() - 1;
  if (weights.size() != layers || biases.size() != layers)
    throw ArgumentError("parameter count does not match architecture depth");
  for (std::size_t i = 0; i < layers; ++i) {
    if (weights[i].rows() != arch.widths[i + 1] || weights[i].cols() != arch.widths[i] ||
        biases[i].size() != arch.widths[i + 1])
      throw ArgumentError("parameter shape mismatch at layer " + std::to_string(i + 2));
  }
}

double activate(Activation a, double v) {
  switch (a) {
    case Activation::relu:
      return v > 0.0 ? v : 0.0;
    case Activation::sigmoid:
      return 1.0 / (1.0 + std::exp(-v));
  }
  return v;
}

Eigen::VectorXd fcnn_forward(const FcnnArchitecture& arch, const FcnnParams& params,
                             std::span<const double> x) {
  params.check_shapes(arch);
  if (static_cast<int>(x.size()) != arch.input_dim())
    throw ArgumentError("input dimension does not match l_1");
  Eigen::VectorXd f = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t i = 0; i < last; ++i) {
    f = params.weights[i] * f + params.biases[i];
    activate_inplace(arch.activation, f);
  }
  return params.weights[last] * f + params.biases[last];
}

Eigen::MatrixXd fcnn_forward_batch(const FcnnArchitecture& arch, const FcnnParams& params,
                                   const Eigen::MatrixXd& inputs) {
  params.check_shapes(arch);
  if (inputs.cols() != arch.input_dim()) throw ArgumentError("input dimension does not match l_1");
  Eigen::MatrixXd f = inputs;
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t i = 0; i < last; ++i) {
    Eigen::MatrixXd z = f * params.weights[i].transpose();
    z.rowwise() += params.biases[i].transpose();
    activate_inplace(arch.activation, z);
    f = std::move(z);
  }
  Eigen::MatrixXd out = f * params.weights[last].transpose();
  out.rowwise() += params.biases[last].transpose();
  return out;
}

Network::Network(FcnnArchitecture a, FcnnParams p) : arch(std::move(a)), params(std::move(p)) {
  params.check_shapes(arch);
  shift.assign(arch.input_dim(), 0.0);
  scale.assign(arch.input_dim(), 1.0);
}

Eigen::VectorXd Network::outputs(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != arch.input_dim())
    throw ArgumentError("input dimension does not match l_1");
  std::vector<double> z(x.begin(), x.end());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = (z[j] - shift[j]) / scale[j];
  return fcnn_forward(arch, params, z);
}

Eigen::MatrixXd Network::standardize(const std::vector<Point>& xs) const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), arch.input_dim());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (static_cast<int>(xs[i].size()) != arch.input_dim())
      throw ArgumentError("input dimension does not match l_1");
    for (int j = 0; j < arch.input_dim(); ++j)
      m(static_cast<Eigen::Index>(i), j) = (xs[i][j] - shift[j]) / scale[j];
  }
  return m;
}

Eigen::MatrixXd Network::outputs(const std::vector<Point>& xs) const {
  return fcnn_forward_batch(arch, params, standardize(xs));
}

FcnnParams constant_output_params(const FcnnArchitecture& arch, const Eigen::VectorXd& output) {
  FcnnParams p = FcnnParams::zeros(arch);
  if (output.size() != arch.output_dim()) throw ArgumentError("constant output has wrong length");
  p.biases.back() = output;
  return p;
}

}  // namespace oodlab
