#include "grpde/nn/mlp.hpp"

#include <cmath>

#include "grpde/error.hpp"

namespace grpde::nn {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "tanh";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "identity" || name == "linear") return Activation::Identity;
  throw Error(Errc::InvalidArgument, "unknown activation '" + name + "'");
}

Eigen::MatrixXd activate(Activation a, const Eigen::MatrixXd& pre) {
  switch (a) {
    case Activation::Tanh: return pre.array().tanh().matrix();
    case Activation::Relu: return pre.cwiseMax(0.0);
    case Activation::Identity: return pre;
  }
  return pre;
}

Eigen::MatrixXd activate_grad(Activation a, const Eigen::MatrixXd& pre) {
  switch (a) {
    case Activation::Tanh: {
      const Eigen::ArrayXXd t = pre.array().tanh();
      return (1.0 - t * t).matrix();
    }
    case Activation::Relu: return (pre.array() > 0.0).cast<double>().matrix();
    case Activation::Identity: return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
  }
  return Eigen::MatrixXd::Ones(pre.rows(), pre.cols());
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  std::vector<std::size_t> widths{spec_.input};
  widths.insert(widths.end(), spec_.hidden.begin(), spec_.hidden.end());
  widths.push_back(spec_.output);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    weights_.emplace_back(std::vector<std::size_t>{widths[l + 1], widths[l]});
    biases_.push_back(spec_.bias ? Tensor({widths[l + 1]}) : Tensor());
  }
}

void Mlp::init(Rng& rng) {
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Tensor& w = weights_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (double& v : w.value) v = (2.0 * rng.uniform() - 1.0) * limit;
    std::fill(biases_[l].value.begin(), biases_[l].value.end(), 0.0);
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x, MlpCache* cache) const {
  if (static_cast<std::size_t>(x.rows()) != spec_.input) {
    throw Error(Errc::ShapeMismatch, "MLP expects " + std::to_string(spec_.input) + " inputs, got " +
                                         std::to_string(x.rows()));
  }
  if (cache) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Eigen::MatrixXd z = weights_[l].matrix() * a;
    if (spec_.bias) z.colwise() += biases_[l].matrix().col(0);
    if (cache) {
      cache->inputs.push_back(a);
      cache->pre.push_back(z);
    }
    const bool last = l + 1 == weights_.size();
    a = last ? std::move(z) : activate(spec_.activation, z);
  }
  return a;
}

Eigen::MatrixXd Mlp::backward(const MlpCache& cache, const Eigen::MatrixXd& dy) {
  if (cache.inputs.size() != weights_.size()) throw Error(Errc::ShapeMismatch, "MLP cache does not match network");
  Eigen::MatrixXd delta = dy;
  for (std::size_t l = weights_.size(); l-- > 0;) {
    if (l + 1 != weights_.size()) {
      delta = delta.cwiseProduct(activate_grad(spec_.activation, cache.pre[l]));
    }
    weights_[l].grad_matrix().noalias() += delta * cache.inputs[l].transpose();
    if (spec_.bias) biases_[l].grad_matrix().col(0) += delta.rowwise().sum();
    delta = weights_[l].matrix().transpose() * delta;
  }
  return delta;
}

ParamList Mlp::parameters() {
  ParamList out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    if (spec_.bias) out.push_back(&biases_[l]);
  }
  return out;
}

std::vector<const Tensor*> Mlp::parameters() const {
  std::vector<const Tensor*> out;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    out.push_back(&weights_[l]);
    if (spec_.bias) out.push_back(&biases_[l]);
  }
  return out;
}

}  // namespace grpde::nn
