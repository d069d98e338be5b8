#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grpde/grid.hpp"
#include "grpde/nn/mlp.hpp"
#include "grpde/rng.hpp"

namespace grpde::nn {

struct DeepOnetSpec {
  GridSpec grid{1, 64};
  std::vector<std::size_t> branch_hidden{128, 128};
  std::vector<std::size_t> trunk_hidden{128, 128};
  std::size_t width = 64;  // p
  Activation activation = Activation::Tanh;
  bool bias_free = true;  // branch without biases, so f = 0 maps to u = 0
};

struct DeepOnetCache {
  MlpCache branch;
  MlpCache trunk;
  Eigen::MatrixXd branch_out;  // p x batch
  Eigen::MatrixXd trunk_out;   // p x N
};

/// Branch/trunk operator network on a fixed grid:
///   u(x_i) = s_out * sum_k branch_k(f / s_in) * trunk_k(x_i)
/// The scales are data statistics fixed before training, not parameters.
class DeepOnet {
 public:
  DeepOnet() = default;
  explicit DeepOnet(DeepOnetSpec spec);

  const DeepOnetSpec& spec() const noexcept { return spec_; }
  void init(Rng& rng);

  double input_scale() const noexcept { return input_scale_; }
  double output_scale() const noexcept { return output_scale_; }
  void set_scales(double input_scale, double output_scale);

  /// Trunk evaluated at all grid points, p x N.
  Eigen::MatrixXd trunk_basis() const;

  /// Columns of `f` are input fields (N x batch); returns N x batch.
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& f, DeepOnetCache* cache = nullptr) const;
  /// Same, reusing a precomputed trunk basis.
  Eigen::MatrixXd forward_with_basis(const Eigen::MatrixXd& f, const Eigen::MatrixXd& basis) const;
  Field forward(const Field& f) const;

  /// Accumulates parameter gradients given d(loss)/d(output).
  void backward(const DeepOnetCache& cache, const Eigen::MatrixXd& d_out);

  ParamList parameters();
  std::vector<const Tensor*> parameters() const;

  Mlp& branch() noexcept { return branch_; }
  Mlp& trunk() noexcept { return trunk_; }

  std::string architecture_json() const;
  static DeepOnet from_architecture_json(const std::string& text);

 private:
  DeepOnetSpec spec_;
  Mlp branch_;
  Mlp trunk_;
  Eigen::MatrixXd coords_;  // dim x N
  double input_scale_ = 1.0;
  double output_scale_ = 1.0;
};

}  // namespace grpde::nn
