#include "grpde/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "grpde/error.hpp"

namespace grpde {

namespace {

// Unitary 1D transforms along the rows, then the columns in 2D.
std::vector<Complex> separable_transform(const GridSpec& grid, std::span<const Complex> values, int sign) {
  if (values.size() != grid.size()) {
    throw Error(Errc::ShapeMismatch, "mode vector length does not match grid");
  }
  const int n = grid.n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<Complex> line(static_cast<std::size_t>(n)), res;
  auto apply = [&] {
    if (sign < 0) {
      fft.fwd(res, line);
    } else {
      fft.inv(res, line);
    }
  };

  std::vector<Complex> out(values.begin(), values.end());
  const std::size_t lines = grid.dim == 1 ? 1 : static_cast<std::size_t>(n);
  for (std::size_t i = 0; i < lines; ++i) {
    std::copy_n(out.begin() + static_cast<std::ptrdiff_t>(i * n), n, line.begin());
    apply();
    for (int k = 0; k < n; ++k) out[i * n + k] = res[static_cast<std::size_t>(k)] * scale;
  }
  if (grid.dim == 2) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = out[static_cast<std::size_t>(i) * n + j];
      apply();
      for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i) * n + j] = res[static_cast<std::size_t>(i)] * scale;
    }
  }
  return out;
}

}  // namespace

std::vector<Complex> dft(const GridSpec& grid, std::span<const Complex> values) {
  return separable_transform(grid, values, -1);
}

std::vector<Complex> dft(const Field& v) {
  std::vector<Complex> c(v.values().begin(), v.values().end());
  return separable_transform(v.grid(), c, -1);
}

std::vector<Complex> idft_complex(const GridSpec& grid, std::span<const Complex> modes) {
  return separable_transform(grid, modes, +1);
}

Field idft(const GridSpec& grid, std::span<const Complex> modes) {
  const auto c = idft_complex(grid, modes);
  Field out(grid);
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

int signed_frequency(int k, int n) noexcept { return 2 * k > n ? k - n : k; }

SpectralDecomposition operator_spectrum(const DiscreteOperator& op) {
  const GridSpec& g = op.grid;
  SpectralDecomposition spec;
  spec.grid = g;
  spec.eigenvalues.resize(g.size());
  std::vector<double> axis(g.n);
  for (int k = 0; k < g.n; ++k) {
    axis[k] = 2.0 * op.neighbor * std::cos(2.0 * std::numbers::pi * k / g.n);
  }
  for (std::size_t p = 0; p < g.size(); ++p) {
    double lambda = op.center;
    if (g.dim == 1) {
      lambda += axis[p];
    } else {
      lambda += axis[p / g.n] + axis[p % g.n];
    }
    spec.eigenvalues[p] = lambda;
  }
  // Poisson DC eigenvalue is exactly zero; the cosine sum leaves rounding residue.
  if (op.kind == OperatorKind::Poisson) spec.eigenvalues[0] = 0.0;
  return spec;
}

Field reference_solution(const DiscreteOperator& op, const Field& f) {
  require_same_grid(op.grid, f.grid(), "reference_solution");
  if (op.singular() && std::abs(f.mean()) > 1e-8) {
    throw Error(Errc::IncompatibleRhs,
                "periodic Poisson right-hand side must have zero mean (mean = " + std::to_string(f.mean()) + ")");
  }
  const auto spec = operator_spectrum(op);
  auto modes = dft(f);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const double lambda = spec.eigenvalues[k];
    if (op.singular() && k == 0) {
      modes[k] = 0.0;
    } else {
      modes[k] /= lambda;
    }
  }
  return idft(f.grid(), modes);
}

}  // namespace grpde
