#pragma once

#include <complex>
#include <span>
#include <vector>

#include "grpde/grid.hpp"
#include "grpde/operator.hpp"

namespace grpde {

using Complex = std::complex<double>;

// Unitary DFT (1/sqrt(N) in both directions), separable over axes. Mode
// vectors use the same layout as fields: entry k0 * n + k1 in 2D.

std::vector<Complex> dft(const Field& v);
std::vector<Complex> dft(const GridSpec& grid, std::span<const Complex> values);
std::vector<Complex> idft_complex(const GridSpec& grid, std::span<const Complex> modes);

/// Real part of the inverse transform.
Field idft(const GridSpec& grid, std::span<const Complex> modes);

/// Maps DFT index k in [0, n) to the signed frequency in (-n/2, n/2].
int signed_frequency(int k, int n) noexcept;

/// Eigenvalues of a circulant operator indexed like DFT modes.
struct SpectralDecomposition {
  GridSpec grid;
  std::vector<double> eigenvalues;
};

SpectralDecomposition operator_spectrum(const DiscreteOperator& op);

/// Exact spectral inverse. For Poisson the DC mode is dropped, giving the
/// minimum-norm solution; throws IncompatibleRHS if |mean(f)| > 1e-8.
Field reference_solution(const DiscreteOperator& op, const Field& f);

}  // namespace grpde
