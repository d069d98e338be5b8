#pragma once

#include <cstdint>

#include "grpde/grid.hpp"
#include "grpde/rng.hpp"

namespace grpde {

/// Gaussian random field with covariance (-Δ + shift I)^(-power) on the
/// periodic unit cell.
struct GrfSpec {
  GridSpec grid{1, 64};
  double shift = 9.0;
  double power = 2.0;
  bool zero_dc = true;
  std::uint64_t seed = 0;
};

/// Variance of the complex Fourier coefficient at integer wavevector k:
/// (4π²|k|² + shift)^(-power).
double grf_mode_variance(const GrfSpec& spec, double k_squared);

/// Draws one real field. Each mode gets a complex Gaussian coefficient
/// (real and imaginary parts carry half the variance each), conjugate pairs
/// are tied together, self-conjugate modes are real with the full variance,
/// and the field is the unitary inverse DFT of the coefficients.
Field sample_grf(const GrfSpec& spec, Rng& rng);

}  // namespace grpde
