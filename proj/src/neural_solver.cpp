#include "grpde/neural_solver.hpp"

namespace grpde {

NeuralSolver::NeuralSolver(nn::DeepOnet model, bool normalize_residual)
    : model_(std::move(model)), basis_(model_.trunk_basis()), normalize_(normalize_residual) {}

Field NeuralSolver::apply(const Field& r) const {
  require_same_grid(model_.spec().grid, r.grid(), "neural solver");
  const auto n = static_cast<Eigen::Index>(r.size());
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(r.data().data(), n);
  double scale = 1.0;
  if (normalize_) {
    const double rho = r.rms();
    if (rho == 0.0) return Field(r.grid());
    scale = rho / model_.input_scale();
    x /= scale;
  }
  Eigen::VectorXd u = model_.forward_with_basis(x, basis_);
  u *= scale;
  return Field(r.grid(), std::vector<double>(u.data(), u.data() + n));
}

}  // namespace grpde
