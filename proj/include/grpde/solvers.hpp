#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "grpde/grid.hpp"
#include "grpde/operator.hpp"

namespace grpde {

class NeuralSolver;

/// V-cycle parameters. `levels` counts grids including the finest one; the
/// coarsest grid (n / 2^(levels-1) points per axis) is solved exactly.
struct MgConfig {
  int levels = 2;
  int pre_smooth = 3;
  int post_smooth = 3;
  double omega = 2.0 / 3.0;
  int coarsest_n = 4;
};

/// Picks `levels` so the coarsest grid has `coarsest_n` points per axis.
MgConfig default_mg_config(const GridSpec& grid, int coarsest_n = 4);

/// Fine-to-coarse rediscretized operators, each level halving n.
struct OperatorHierarchy {
  std::vector<DiscreteOperator> levels;
};

OperatorHierarchy build_hierarchy(const DiscreteOperator& fine, const MgConfig& cfg);

// Transfer operators: full weighting ([1,2,1]/4 per axis, periodic) and
// piecewise-linear interpolation. In 1D prolong = 2 * restrictᵀ.
Field restrict_full_weighting(const Field& fine);
Field prolong_linear(const Field& coarse, const GridSpec& fine_grid);

/// ω D⁻¹ r
Field jacobi_apply(const DiscreteOperator& op, const Field& r, double omega);

/// (D + L)⁻¹ r by forward substitution in lexicographic order, L being the
/// strictly lower part of the assembled periodic matrix.
Field gauss_seidel_apply(const DiscreteOperator& op, const Field& r);

/// One V-cycle with zero initial guess, i.e. an approximation of L⁻¹ r.
Field vcycle_apply(const OperatorHierarchy& hierarchy, const MgConfig& cfg, const Field& r);

struct WeightedJacobi {
  double omega = 1.0;
};
struct GaussSeidel {};
struct MultigridVCycle {
  MgConfig config;
  std::shared_ptr<const OperatorHierarchy> hierarchy;
};
struct NeuralSurrogate {
  std::shared_ptr<const NeuralSolver> model;
};

using SolverKind = std::variant<WeightedJacobi, GaussSeidel, MultigridVCycle, NeuralSurrogate>;

/// One preconditioning function C_j of an ensemble.
struct SolverHandle {
  int id = 1;
  SolverKind kind;
  std::string label;

  bool is_linear() const noexcept { return !std::holds_alternative<NeuralSurrogate>(kind); }
};

SolverHandle make_jacobi(int id, double omega);
SolverHandle make_gauss_seidel(int id);
SolverHandle make_vcycle(int id, const DiscreteOperator& op, const MgConfig& cfg);
SolverHandle make_neural(int id, std::shared_ptr<const NeuralSolver> model, std::string label = "DeepONet");

/// C_j(r): the correction added to the iterate.
Field apply_solver(const SolverHandle& handle, const DiscreteOperator& op, const Field& r);

/// Dense I - C_j L, assembled column by column (N <= 4096). Linear kinds only.
Eigen::MatrixXd error_propagation_matrix(const SolverHandle& handle, const DiscreteOperator& op);

}  // namespace grpde
