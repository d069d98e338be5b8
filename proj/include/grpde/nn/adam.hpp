#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "grpde/nn/tensor.hpp"

namespace grpde::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.005;
};

/// Adam with bias-corrected moments and decoupled weight decay:
///   p <- p (1 - lr wd) - lr m_hat / (sqrt(v_hat) + eps)
class Adam {
 public:
  Adam() = default;
  Adam(AdamConfig cfg, std::span<Tensor* const> params);

  AdamConfig& config() noexcept { return cfg_; }
  const AdamConfig& config() const noexcept { return cfg_; }
  std::uint64_t steps() const noexcept { return step_; }

  /// Applies one update from the gradients stored in `params`.
  void update(std::span<Tensor* const> params);

  const std::vector<std::vector<double>>& first_moment() const noexcept { return m_; }
  const std::vector<std::vector<double>>& second_moment() const noexcept { return v_; }

  /// Restores a saved state; buffer shapes are checked on the next update.
  void restore(std::uint64_t step, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v);

 private:
  AdamConfig cfg_;
  std::uint64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

/// Scales all gradients by max_norm / ||g|| when ||g|| > max_norm.
/// Returns the norm before clipping.
double clip_global_norm(std::span<Tensor* const> params, double max_norm);

}  // namespace grpde::nn
