#include "grpde/solvers.hpp"

#include <array>
#include <sstream>
#include <string>

#include "grpde/error.hpp"
#include "grpde/neural_solver.hpp"

namespace grpde {

namespace {

std::string omega_label(double omega) {
  std::ostringstream os;
  os << "Jacobi(w=" << omega << ")";
  return os.str();
}

// Periodic neighbor indices of point p (2 * dim entries, possibly repeated on n = 2).
std::array<std::size_t, 4> neighbors(const GridSpec& g, std::size_t p, int& count) {
  const std::size_t n = static_cast<std::size_t>(g.n);
  std::array<std::size_t, 4> q{};
  if (g.dim == 1) {
    q[0] = (p + n - 1) % n;
    q[1] = (p + 1) % n;
    count = 2;
  } else {
    const std::size_t i = p / n;
    const std::size_t j = p % n;
    q[0] = ((i + n - 1) % n) * n + j;
    q[1] = ((i + 1) % n) * n + j;
    q[2] = i * n + (j + n - 1) % n;
    q[3] = i * n + (j + 1) % n;
    count = 4;
  }
  return q;
}

}  // namespace

Field jacobi_apply(const DiscreteOperator& op, const Field& r, double omega) {
  require_same_grid(op.grid, r.grid(), "jacobi_apply");
  if (!(op.center > 0.0)) throw Error(Errc::ZeroDiagonal, "Jacobi needs positive diagonal entries");
  Field out = r;
  out *= omega / op.center;
  return out;
}

Field gauss_seidel_apply(const DiscreteOperator& op, const Field& r) {
  require_same_grid(op.grid, r.grid(), "gauss_seidel_apply");
  if (op.center == 0.0) throw Error(Errc::ZeroDiagonal, "Gauss-Seidel needs nonzero diagonal entries");
  Field x(op.grid);
  for (std::size_t p = 0; p < x.size(); ++p) {
    int count = 0;
    const auto q = neighbors(op.grid, p, count);
    double acc = r[p];
    for (int k = 0; k < count; ++k) {
      if (q[k] < p) acc -= op.neighbor * x[q[k]];
    }
    x[p] = acc / op.center;
  }
  return x;
}

SolverHandle make_jacobi(int id, double omega) {
  if (!(omega > 0.0 && omega <= 1.0)) {
    throw Error(Errc::InvalidArgument, "Jacobi relaxation must lie in (0, 1], got " + std::to_string(omega));
  }
  return SolverHandle{id, WeightedJacobi{omega}, omega_label(omega)};
}

SolverHandle make_gauss_seidel(int id) { return SolverHandle{id, GaussSeidel{}, "GS"}; }

SolverHandle make_vcycle(int id, const DiscreteOperator& op, const MgConfig& cfg) {
  auto hier = std::make_shared<const OperatorHierarchy>(build_hierarchy(op, cfg));
  return SolverHandle{id, MultigridVCycle{cfg, std::move(hier)}, "MG"};
}

SolverHandle make_neural(int id, std::shared_ptr<const NeuralSolver> model, std::string label) {
  if (!model) throw Error(Errc::MissingSurrogate, "neural solver handle needs a model");
  return SolverHandle{id, NeuralSurrogate{std::move(model)}, std::move(label)};
}

Field apply_solver(const SolverHandle& handle, const DiscreteOperator& op, const Field& r) {
  return std::visit(
      [&](const auto& kind) -> Field {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, WeightedJacobi>) {
          return jacobi_apply(op, r, kind.omega);
        } else if constexpr (std::is_same_v<K, GaussSeidel>) {
          return gauss_seidel_apply(op, r);
        } else if constexpr (std::is_same_v<K, MultigridVCycle>) {
          if (!kind.hierarchy) throw Error(Errc::HierarchyMismatch, "multigrid handle has no hierarchy");
          const DiscreteOperator& fine = kind.hierarchy->levels.front();
          if (fine.grid != op.grid || fine.kind != op.kind || fine.shift != op.shift) {
            throw Error(Errc::HierarchyMismatch, "multigrid hierarchy was built for a different operator");
          }
          return vcycle_apply(*kind.hierarchy, kind.config, r);
        } else {
          require_same_grid(op.grid, r.grid(), "neural solver");
          return kind.model->apply(r);
        }
      },
      handle.kind);
}

Eigen::MatrixXd error_propagation_matrix(const SolverHandle& handle, const DiscreteOperator& op) {
  if (!handle.is_linear()) {
    throw Error(Errc::NonlinearSolver, "error propagation matrix requires a linear solver");
  }
  const std::size_t total = op.grid.size();
  if (total > 4096) throw Error(Errc::InvalidArgument, "error propagation matrix limited to N <= 4096");
  Eigen::MatrixXd m(total, total);
  Field basis(op.grid);
  for (std::size_t c = 0; c < total; ++c) {
    basis[c] = 1.0;
    const Field correction = apply_solver(handle, op, apply_operator(op, basis));
    for (std::size_t r = 0; r < total; ++r) m(r, c) = basis[r] - correction[r];
    basis[c] = 0.0;
  }
  return m;
}

}  // namespace grpde
