#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oodlab/core.hpp"

namespace oodlab {

enum class Activation { relu, sigmoid };

/// Layer widths (l_1, ..., l_g) with g >= 3: input, hidden layers, output.
struct FcnnArchitecture {
  std::vector<int> widths;
  Activation activation = Activation::relu;

  void validate() const;
  int depth() const { return static_cast<int>(widths.size()); }
  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
};

/// weights[i] maps layer i+1 to layer i+2 (shape l_{i+2} x l_{i+1}).
struct FcnnParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static FcnnParams zeros(const FcnnArchitecture& arch);
  void check_shapes(const FcnnArchitecture& arch) const;
};

/// f_i = act(W_i f_{i-1} + b_i) for hidden layers; the last layer is affine.
Eigen::VectorXd fcnn_forward(const FcnnArchitecture& arch, const FcnnParams& params,
                             std::span<const double> x);

/// Row-wise forward pass; inputs are n x l_1, result is n x l_g.
Eigen::MatrixXd fcnn_forward_batch(const FcnnArchitecture& arch, const FcnnParams& params,
                                   const Eigen::MatrixXd& inputs);

double activate(Activation a, double v);

/// Elementwise activation through Eigen's vectorized array functions.
template <class Derived>
void activate_inplace(Activation a, Eigen::MatrixBase<Derived>& m) {
  if (a == Activation::relu)
    m.derived() = m.cwiseMax(0.0);
  else
    m.derived() = (1.0 + (-m.array()).exp()).inverse().matrix();
}

/// An FCNN together with a fixed per-feature affine input map
/// z = (x - shift) / scale. Identity unless training installs one.
struct Network {
  FcnnArchitecture arch;
  FcnnParams params;
  std::vector<double> shift;
  std::vector<double> scale;

  Network() = default;
  Network(FcnnArchitecture a, FcnnParams p);

  Eigen::VectorXd outputs(std::span<const double> x) const;
  Eigen::MatrixXd outputs(const std::vector<Point>& xs) const;
  Eigen::MatrixXd standardize(const std::vector<Point>& xs) const;
};

/// Parameters for which every output equals `output` regardless of input.
FcnnParams constant_output_params(const FcnnArchitecture& arch, const Eigen::VectorXd& output);

}  // namespace oodlab
