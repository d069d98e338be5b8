#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grpde/nn/tensor.hpp"
#include "grpde/rng.hpp"

namespace grpde::nn {

enum class Activation { Tanh, Relu, Identity };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre);
/// Derivative of the activation, expressed through pre-activation values.
Eigen::MatrixXd activate_grad(Activation a, const Eigen::MatrixXd& pre);

struct MlpSpec {
  std::size_t input = 1;
  std::vector<std::size_t> hidden;
  std::size_t output = 1;
  Activation activation = Activation::Tanh;
  bool bias = true;
};

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // input of each layer
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of each layer
};

/// Fully connected network; activation after every hidden layer, linear
/// output layer. Columns of the input matrix are independent samples.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const noexcept { return spec_; }
  std::size_t layer_count() const noexcept { return weights_.size(); }

  /// Glorot-uniform weights, zero biases.
  void init(Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& x, MlpCache* cache = nullptr) const;

  /// Accumulates parameter gradients and returns d(loss)/d(input).
  Eigen::MatrixXd backward(const MlpCache& cache, const Eigen::MatrixXd& dy);

  ParamList parameters();
  std::vector<const Tensor*> parameters() const;

  Tensor& weight(std::size_t layer) { return weights_[layer]; }
  Tensor& bias(std::size_t layer) { return biases_[layer]; }

 private:
  MlpSpec spec_;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;  // empty tensors when bias-free
};

}  // namespace grpde::nn
