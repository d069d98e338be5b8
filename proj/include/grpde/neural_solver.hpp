#pragma once

#include <Eigen/Dense>

#include "grpde/grid.hpp"
#include "grpde/nn/deeponet.hpp"

namespace grpde {

/// Inference wrapper that uses a trained DeepONet as a preconditioning
/// function C(r). The trunk basis is evaluated once on construction.
///
/// With `normalize_residual` the network is applied at the amplitude it was
/// trained on and the result is rescaled,
///   C(r) = (|r| / s) G(r s / |r|),   |r| = rms(r), s = model input scale,
/// so C is positively homogeneous and C(0) = 0. Late iterations have
/// residuals many orders of magnitude below the training data, where the
/// raw network output would be dominated by its nonlinearity.
class NeuralSolver {
 public:
  explicit NeuralSolver(nn::DeepOnet model, bool normalize_residual = true);

  Field apply(const Field& r) const;

  const nn::DeepOnet& model() const noexcept { return model_; }
  bool normalizes_residual() const noexcept { return normalize_; }

 private:
  nn::DeepOnet model_;
  Eigen::MatrixXd basis_;
  bool normalize_;
};

}  // namespace grpde
