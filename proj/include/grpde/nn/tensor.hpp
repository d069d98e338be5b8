#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace grpde::nn {

/// Dense parameter tensor with a gradient buffer of the same shape. Rank-2
/// tensors are stored column-major so they map directly onto Eigen matrices.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);

  std::size_t size() const noexcept { return value.size(); }
  std::size_t rows() const noexcept { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const noexcept { return shape.size() < 2 ? 1 : shape[1]; }

  void zero_grad();

  Eigen::Map<Eigen::MatrixXd> matrix() { return {value.data(), Eigen::Index(rows()), Eigen::Index(cols())}; }
  Eigen::Map<const Eigen::MatrixXd> matrix() const {
    return {value.data(), Eigen::Index(rows()), Eigen::Index(cols())};
  }
  Eigen::Map<Eigen::MatrixXd> grad_matrix() { return {grad.data(), Eigen::Index(rows()), Eigen::Index(cols())}; }
};

using ParamList = std::vector<Tensor*>;

void zero_grads(std::span<Tensor* const> params);
double grad_norm(std::span<Tensor* const> params);

}  // namespace grpde::nn
