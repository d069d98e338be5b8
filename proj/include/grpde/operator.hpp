#pragma once

#include "grpde/grid.hpp"

namespace grpde {

enum class OperatorKind { Poisson, Helmholtz, Diagonal };

/// Constant-coefficient circulant stencil: `center` on the diagonal and
/// `neighbor` for each of the 2*dim nearest periodic neighbors.
///
/// Poisson:   -Δ_h           center 2d/h²,      neighbor -1/h²
/// Helmholtz: -Δ_h - a² I     center 2d/h² - a², neighbor -1/h²
/// Diagonal:  c I             (test operator; no coupling)
struct DiscreteOperator {
  GridSpec grid;
  OperatorKind kind = OperatorKind::Poisson;
  double shift = 0.0;  // a²
  double center = 0.0;
  double neighbor = 0.0;

  /// True when the constant field is in the null space (periodic Poisson).
  bool singular() const noexcept { return kind == OperatorKind::Poisson; }
};

/// Throws GridTooSmall (n < 4) or ResonantShift (a² within 1e-12 of a Laplacian
/// eigenvalue). Helmholtz with a² = 0 is returned as the Poisson operator.
DiscreteOperator build_operator(const GridSpec& grid, OperatorKind kind, double shift = 0.0);

/// Same PDE rediscretized on another grid; used for coarse multigrid levels,
/// which may go down to n = 2.
DiscreteOperator rediscretize(const DiscreteOperator& op, const GridSpec& grid);

DiscreteOperator diagonal_operator(const GridSpec& grid, double value);

Field apply_operator(const DiscreteOperator& op, const Field& v);

/// f - L u
Field residual(const DiscreteOperator& op, const Field& u, const Field& f);

}  // namespace grpde
