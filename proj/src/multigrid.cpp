#include <string>

#include "grpde/error.hpp"
#include "grpde/solvers.hpp"
#include "grpde/spectral.hpp"

namespace grpde {

MgConfig default_mg_config(const GridSpec& grid, int coarsest_n) {
  if (coarsest_n < 2) throw Error(Errc::InvalidArgument, "coarsest_n must be at least 2");
  MgConfig cfg;
  cfg.coarsest_n = coarsest_n;
  cfg.levels = 1;
  int n = grid.n;
  while (n > coarsest_n && n % 2 == 0) {
    n /= 2;
    ++cfg.levels;
  }
  if (cfg.levels < 2) {
    throw Error(Errc::OddGrid, "grid n=" + std::to_string(grid.n) + " cannot be coarsened towards n=" +
                                   std::to_string(coarsest_n));
  }
  return cfg;
}

OperatorHierarchy build_hierarchy(const DiscreteOperator& fine, const MgConfig& cfg) {
  if (cfg.levels < 2) throw Error(Errc::HierarchyMismatch, "multigrid needs at least 2 levels");
  if (cfg.coarsest_n < 2) throw Error(Errc::HierarchyMismatch, "coarsest_n must be at least 2");
  const int factor = 1 << (cfg.levels - 1);
  if (fine.grid.n % factor != 0 || fine.grid.n / factor < 2) {
    throw Error(Errc::HierarchyMismatch, "n=" + std::to_string(fine.grid.n) + " is not divisible into " +
                                             std::to_string(cfg.levels) + " levels");
  }
  OperatorHierarchy hier;
  hier.levels.push_back(fine);
  GridSpec g = fine.grid;
  for (int l = 1; l < cfg.levels; ++l) {
    g.n /= 2;
    hier.levels.push_back(rediscretize(fine, g));
  }
  return hier;
}

Field restrict_full_weighting(const Field& fine) {
  const GridSpec& fg = fine.grid();
  if (fg.n % 2 != 0) throw Error(Errc::OddGrid, "cannot restrict odd grid n=" + std::to_string(fg.n));
  const int n = fg.n;
  const int nc = n / 2;
  GridSpec cg{fg.dim, nc};
  Field coarse(cg);
  auto w = [n](int i) { return (i % n + n) % n; };
  if (fg.dim == 1) {
    for (int i = 0; i < nc; ++i) {
      coarse[i] = 0.25 * fine[w(2 * i - 1)] + 0.5 * fine[2 * i] + 0.25 * fine[w(2 * i + 1)];
    }
    return coarse;
  }
  static constexpr double kWeights[3] = {0.25, 0.5, 0.25};
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nc; ++j) {
      double acc = 0.0;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          acc += kWeights[di + 1] * kWeights[dj + 1] *
                 fine[static_cast<std::size_t>(w(2 * i + di)) * n + w(2 * j + dj)];
        }
      }
      coarse[static_cast<std::size_t>(i) * nc + j] = acc;
    }
  }
  return coarse;
}

Field prolong_linear(const Field& coarse, const GridSpec& fine_grid) {
  const GridSpec& cg = coarse.grid();
  if (fine_grid.dim != cg.dim || fine_grid.n != 2 * cg.n) {
    throw Error(Errc::GridMismatch, "prolongation target must have twice the coarse resolution");
  }
  const int nc = cg.n;
  const int n = fine_grid.n;
  Field fine(fine_grid);
  if (cg.dim == 1) {
    for (int i = 0; i < nc; ++i) {
      fine[2 * i] = coarse[i];
      fine[2 * i + 1] = 0.5 * (coarse[i] + coarse[(i + 1) % nc]);
    }
    return fine;
  }
  auto c = [&](int i, int j) { return coarse[static_cast<std::size_t>(i % nc) * nc + (j % nc)]; };
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nc; ++j) {
      const std::size_t r0 = static_cast<std::size_t>(2 * i) * n;
      const std::size_t r1 = static_cast<std::size_t>(2 * i + 1) * n;
      fine[r0 + 2 * j] = c(i, j);
      fine[r0 + 2 * j + 1] = 0.5 * (c(i, j) + c(i, j + 1));
      fine[r1 + 2 * j] = 0.5 * (c(i, j) + c(i + 1, j));
      fine[r1 + 2 * j + 1] = 0.25 * (c(i, j) + c(i, j + 1) + c(i + 1, j) + c(i + 1, j + 1));
    }
  }
  return fine;
}

namespace {

void smooth(const DiscreteOperator& op, const Field& r, double omega, int sweeps, Field& e, bool zero_start) {
  const double scale = omega / op.center;
  for (int s = 0; s < sweeps; ++s) {
    if (zero_start && s == 0) {
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = scale * r[i];
      continue;
    }
    const Field defect = residual(op, e, r);
    e.axpy(scale, defect);
  }
}

Field vcycle_level(const OperatorHierarchy& hier, const MgConfig& cfg, std::size_t level, const Field& r) {
  const DiscreteOperator& op = hier.levels[level];
  if (level + 1 == hier.levels.size()) return reference_solution(op, op.singular() ? project_zero_mean(r) : r);

  Field e(op.grid);
  smooth(op, r, cfg.omega, cfg.pre_smooth, e, true);
  const Field defect = residual(op, e, r);
  const Field coarse_rhs = restrict_full_weighting(defect);
  const Field coarse_err = vcycle_level(hier, cfg, level + 1, coarse_rhs);
  e += prolong_linear(coarse_err, op.grid);
  smooth(op, r, cfg.omega, cfg.post_smooth, e, false);
  return e;
}

}  // namespace

Field vcycle_apply(const OperatorHierarchy& hierarchy, const MgConfig& cfg, const Field& r) {
  if (hierarchy.levels.size() != static_cast<std::size_t>(cfg.levels) || hierarchy.levels.size() < 2) {
    throw Error(Errc::HierarchyMismatch, "hierarchy has " + std::to_string(hierarchy.levels.size()) +
                                             " levels, config expects " + std::to_string(cfg.levels));
  }
  if (hierarchy.levels.front().grid != r.grid()) {
    throw Error(Errc::HierarchyMismatch, "residual grid does not match the finest hierarchy level");
  }
  for (std::size_t l = 1; l < hierarchy.levels.size(); ++l) {
    if (hierarchy.levels[l].grid.n * 2 != hierarchy.levels[l - 1].grid.n) {
      throw Error(Errc::HierarchyMismatch, "adjacent hierarchy levels must have a 2:1 ratio");
    }
  }
  if (hierarchy.levels.front().center <= 0.0) {
    throw Error(Errc::ZeroDiagonal, "multigrid smoother needs positive diagonal entries");
  }
  return vcycle_level(hierarchy, cfg, 0, r);
}

}  // namespace grpde
