#pragma once

// Dense reference constructions used by the unit and acceptance tests. They
// are assembled entry by entry from the textbook definitions and never call
// the stencil, transfer or solver kernels they are compared against.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "grpde/grid.hpp"
#include "grpde/operator.hpp"
#include "grpde/rng.hpp"
#include "grpde/solvers.hpp"

namespace grpde::test {

inline Field random_field(const GridSpec& g, Rng& rng) {
  Field v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

inline Eigen::VectorXd to_eigen(const Field& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data().data(), static_cast<Eigen::Index>(v.size()));
}

inline Field from_eigen(const GridSpec& g, const Eigen::VectorXd& x) {
  return Field(g, std::vector<double>(x.data(), x.data() + x.size()));
}

inline int wrap(int i, int n) { return ((i % n) + n) % n; }

/// -Δ_h - a² assembled from the 3-point (1D) or 5-point (2D) formula.
inline Eigen::MatrixXd dense_operator(const DiscreteOperator& op) {
  const int n = op.grid.n;
  const double inv_h2 = static_cast<double>(n) * n;
  const auto size = static_cast<Eigen::Index>(op.grid.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
  if (op.kind == OperatorKind::Diagonal) {
    a.diagonal().setConstant(op.center);
    return a;
  }
  if (op.grid.dim == 1) {
    for (int i = 0; i < n; ++i) {
      a(i, i) += 2.0 * inv_h2 - op.shift;
      a(i, wrap(i - 1, n)) -= inv_h2;
      a(i, wrap(i + 1, n)) -= inv_h2;
    }
  } else {
    auto idx = [n](int i, int j) { return static_cast<Eigen::Index>(wrap(i, n) * n + wrap(j, n)); };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Eigen::Index r = idx(i, j);
        a(r, r) += 4.0 * inv_h2 - op.shift;
        a(r, idx(i - 1, j)) -= inv_h2;
        a(r, idx(i + 1, j)) -= inv_h2;
        a(r, idx(i, j - 1)) -= inv_h2;
        a(r, idx(i, j + 1)) -= inv_h2;
      }
    }
  }
  return a;
}

/// Columns are the unitary Fourier modes in DFT index order.
inline Eigen::MatrixXcd dft_matrix(const GridSpec& g) {
  const int n = g.n;
  const auto size = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd p(size, size);
  const double two_pi = 2.0 * std::numbers::pi;
  if (g.dim == 1) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) p(j, k) = std::polar(1.0 / std::sqrt(n), two_pi * j * k / n);
  } else {
    for (int j0 = 0; j0 < n; ++j0)
      for (int j1 = 0; j1 < n; ++j1)
        for (int k0 = 0; k0 < n; ++k0)
          for (int k1 = 0; k1 < n; ++k1)
            p(j0 * n + j1, k0 * n + k1) = std::polar(1.0 / n, two_pi * (j0 * k0 + j1 * k1) / n);
  }
  return p;
}

/// 1D full weighting n -> n/2: coarse i sits on fine 2i.
inline Eigen::MatrixXd dense_restriction_1d(int n) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n / 2, n);
  for (int i = 0; i < n / 2; ++i) {
    r(i, wrap(2 * i - 1, n)) += 0.25;
    r(i, 2 * i) += 0.5;
    r(i, wrap(2 * i + 1, n)) += 0.25;
  }
  return r;
}

/// 1D linear interpolation n/2 -> n.
inline Eigen::MatrixXd dense_prolongation_1d(int n) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n / 2);
  for (int i = 0; i < n / 2; ++i) {
    p(2 * i, i) = 1.0;
    p(2 * i + 1, i) += 0.5;
    p(2 * i + 1, wrap(i + 1, n / 2)) += 0.5;
  }
  return p;
}

/// Tensor product of two 1D transfer matrices for row-major 2D fields.
inline Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

inline Eigen::MatrixXd dense_restriction(const GridSpec& g) {
  const Eigen::MatrixXd r = dense_restriction_1d(g.n);
  return g.dim == 1 ? r : kron(r, r);
}

inline Eigen::MatrixXd dense_prolongation(const GridSpec& g) {
  const Eigen::MatrixXd p = dense_prolongation_1d(g.n);
  return g.dim == 1 ? p : kron(p, p);
}

/// I - ω D⁻¹ A
inline Eigen::MatrixXd dense_jacobi_error(const Eigen::MatrixXd& a, double omega) {
  const Eigen::VectorXd dinv = a.diagonal().cwiseInverse();
  return Eigen::MatrixXd::Identity(a.rows(), a.cols()) - omega * dinv.asDiagonal() * a;
}

/// I - (D + L)⁻¹ A with L the strictly lower triangle.
inline Eigen::MatrixXd dense_gauss_seidel_error(const Eigen::MatrixXd& a) {
  const Eigen::MatrixXd lower = a.triangularView<Eigen::Lower>();
  return Eigen::MatrixXd::Identity(a.rows(), a.cols()) - lower.triangularView<Eigen::Lower>().solve(a);
}

/// Matrix of the V-cycle preconditioner r -> C r, built level by level from
/// dense smoothers, transfers and a pseudo-inverse on the coarsest grid.
inline Eigen::MatrixXd dense_vcycle(const DiscreteOperator& op, const MgConfig& cfg, int levels) {
  const Eigen::MatrixXd a = dense_operator(op);
  if (levels == 1) return a.completeOrthogonalDecomposition().pseudoInverse();
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd j = (cfg.omega / op.center) * id;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
  for (int s = 0; s < cfg.pre_smooth; ++s) x += j * (id - a * x);
  const GridSpec coarse{op.grid.dim, op.grid.n / 2};
  const Eigen::MatrixXd cc = dense_vcycle(rediscretize(op, coarse), cfg, levels - 1);
  x += dense_prolongation(op.grid) * cc * dense_restriction(op.grid) * (id - a * x);
  for (int s = 0; s < cfg.post_smooth; ++s) x += j * (id - a * x);
  return x;
}

/// Largest singular value of m restricted to zero-mean vectors (both sides).
inline double zero_mean_norm(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  const Eigen::MatrixXd p0 = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  return Eigen::JacobiSVD<Eigen::MatrixXd>(p0 * m * p0).singularValues()(0);
}

inline double spectral_norm(const Eigen::MatrixXd& m) { return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0); }

}  // namespace grpde::test
