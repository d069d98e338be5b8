#include "grpde/grid.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "grpde/error.hpp"
#include "grpde/operator.hpp"
#include "grpde/spectral.hpp"

namespace grpde {

void validate_grid(const GridSpec& grid, int min_n) {
  if (grid.dim != 1 && grid.dim != 2) {
    throw Error(Errc::InvalidArgument, "grid dimension must be 1 or 2, got " + std::to_string(grid.dim));
  }
  if (grid.n < min_n) {
    throw Error(Errc::GridTooSmall,
                "need at least " + std::to_string(min_n) + " points per axis, got " + std::to_string(grid.n));
  }
}

Field::Field(GridSpec grid) : grid_(grid), values_(grid.size(), 0.0) {}

Field::Field(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(Errc::ShapeMismatch, "field has " + std::to_string(values_.size()) + " values, grid needs " +
                                         std::to_string(grid_.size()));
  }
}

double Field::squared_norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return s;
}

double Field::norm() const { return std::sqrt(squared_norm()); }

double Field::mean() const {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double Field::rms() const {
  if (values_.empty()) return 0.0;
  return std::sqrt(squared_norm() / static_cast<double>(values_.size()));
}

bool Field::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_, "field addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_, "field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& other) {
  require_same_grid(grid_, other.grid_, "axpy");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (a != b) {
    throw Error(Errc::GridMismatch, std::string(what) + ": grid " + std::to_string(a.dim) + "D n=" +
                                        std::to_string(a.n) + " vs " + std::to_string(b.dim) +
                                        "D n=" + std::to_string(b.n));
  }
}

double dot(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Field project_zero_mean(const Field& v) {
  Field out = v;
  const double m = v.mean();
  for (double& x : out.data()) x -= m;
  return out;
}

std::vector<std::vector<double>> grid_coordinates(const GridSpec& grid) {
  const std::size_t total = grid.size();
  std::vector<std::vector<double>> coords(grid.dim, std::vector<double>(total));
  const double h = grid.h();
  for (std::size_t p = 0; p < total; ++p) {
    if (grid.dim == 1) {
      coords[0][p] = static_cast<double>(p) * h;
    } else {
      coords[0][p] = static_cast<double>(p / grid.n) * h;
      coords[1][p] = static_cast<double>(p % grid.n) * h;
    }
  }
  return coords;
}

// ---------------------------------------------------------------------------
// Operators

namespace {

DiscreteOperator make_stencil(const GridSpec& grid, OperatorKind kind, double shift) {
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  DiscreteOperator op;
  op.grid = grid;
  op.kind = kind;
  op.shift = shift;
  op.center = 2.0 * grid.dim * inv_h2 - shift;
  op.neighbor = -inv_h2;
  return op;
}

void check_resonance(const DiscreteOperator& op) {
  const auto spec = operator_spectrum(op);
  for (std::size_t k = 0; k < spec.eigenvalues.size(); ++k) {
    if (std::abs(spec.eigenvalues[k]) < 1e-12) {
      throw Error(Errc::ResonantShift, "a^2 = " + std::to_string(op.shift) +
                                           " coincides with a Laplacian eigenvalue (mode " + std::to_string(k) +
                                           ")");
    }
  }
}

}  // namespace

DiscreteOperator build_operator(const GridSpec& grid, OperatorKind kind, double shift) {
  validate_grid(grid);
  if (kind == OperatorKind::Diagonal) {
    throw Error(Errc::InvalidArgument, "use diagonal_operator() for diagonal test operators");
  }
  if (shift < 0.0) throw Error(Errc::InvalidArgument, "Helmholtz shift a^2 must be non-negative");
  if (kind == OperatorKind::Poisson) shift = 0.0;
  if (kind == OperatorKind::Helmholtz && shift == 0.0) kind = OperatorKind::Poisson;
  DiscreteOperator op = make_stencil(grid, kind, shift);
  if (kind == OperatorKind::Helmholtz) check_resonance(op);
  return op;
}

DiscreteOperator rediscretize(const DiscreteOperator& op, const GridSpec& grid) {
  validate_grid(grid, 2);
  if (op.kind == OperatorKind::Diagonal) return diagonal_operator(grid, op.center);
  DiscreteOperator coarse = make_stencil(grid, op.kind, op.shift);
  if (coarse.kind == OperatorKind::Helmholtz) check_resonance(coarse);
  return coarse;
}

DiscreteOperator diagonal_operator(const GridSpec& grid, double value) {
  validate_grid(grid, 2);
  DiscreteOperator op;
  op.grid = grid;
  op.kind = OperatorKind::Diagonal;
  op.center = value;
  op.neighbor = 0.0;
  return op;
}

Field apply_operator(const DiscreteOperator& op, const Field& v) {
  require_same_grid(op.grid, v.grid(), "apply_operator");
  const int n = op.grid.n;
  Field out(op.grid);
  if (op.grid.dim == 1) {
    for (int i = 0; i < n; ++i) {
      const int im = (i + n - 1) % n;
      const int ip = (i + 1) % n;
      out[i] = op.center * v[i] + op.neighbor * (v[im] + v[ip]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      const int im = (i + n - 1) % n;
      const int ip = (i + 1) % n;
      for (int j = 0; j < n; ++j) {
        const int jm = (j + n - 1) % n;
        const int jp = (j + 1) % n;
        const std::size_t p = static_cast<std::size_t>(i) * n + j;
        out[p] = op.center * v[p] +
                 op.neighbor * (v[static_cast<std::size_t>(im) * n + j] + v[static_cast<std::size_t>(ip) * n + j] +
                                v[static_cast<std::size_t>(i) * n + jm] + v[static_cast<std::size_t>(i) * n + jp]);
      }
    }
  }
  return out;
}

Field residual(const DiscreteOperator& op, const Field& u, const Field& f) {
  require_same_grid(op.grid, f.grid(), "residual");
  Field r = f;
  r -= apply_operator(op, u);
  return r;
}

}  // namespace grpde
