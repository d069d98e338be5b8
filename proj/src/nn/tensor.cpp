#include "grpde/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace grpde::nn {

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)) {
  const std::size_t count =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<std::size_t>());
  value.assign(count, 0.0);
  grad.assign(count, 0.0);
}

void Tensor::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

void zero_grads(std::span<Tensor* const> params) {
  for (Tensor* t : params) t->zero_grad();
}

double grad_norm(std::span<Tensor* const> params) {
  double s = 0.0;
  for (const Tensor* t : params) {
    for (double g : t->grad) s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace grpde::nn
