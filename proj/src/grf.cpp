#include "grpde/grf.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "grpde/error.hpp"
#include "grpde/spectral.hpp"

namespace grpde {

double grf_mode_variance(const GrfSpec& spec, double k_squared) {
  const double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  return std::pow(four_pi2 * k_squared + spec.shift, -spec.power);
}

Field sample_grf(const GrfSpec& spec, Rng& rng) {
  validate_grid(spec.grid, 2);
  if (!(spec.shift > 0.0)) throw Error(Errc::InvalidArgument, "GRF shift must be positive");
  if (!(spec.power >= 1.0)) throw Error(Errc::InvalidArgument, "GRF power must be at least 1");

  const int n = spec.grid.n;
  const std::size_t total = spec.grid.size();
  std::vector<Complex> modes(total);
  // Conjugate partner of a mode index: negate every axis frequency.
  auto partner = [&](std::size_t k) -> std::size_t {
    if (spec.grid.dim == 1) return static_cast<std::size_t>((n - static_cast<int>(k)) % n);
    const int k0 = static_cast<int>(k) / n;
    const int k1 = static_cast<int>(k) % n;
    return static_cast<std::size_t>(((n - k0) % n) * n + (n - k1) % n);
  };
  auto k_squared = [&](std::size_t k) -> double {
    if (spec.grid.dim == 1) {
      const double s = signed_frequency(static_cast<int>(k), n);
      return s * s;
    }
    const double s0 = signed_frequency(static_cast<int>(k) / n, n);
    const double s1 = signed_frequency(static_cast<int>(k) % n, n);
    return s0 * s0 + s1 * s1;
  };

  for (std::size_t k = 0; k < total; ++k) {
    const std::size_t kc = partner(k);
    if (kc < k) continue;  // already set with its partner
    const double var = grf_mode_variance(spec, k_squared(k));
    if (kc == k) {
      modes[k] = Complex(std::sqrt(var) * rng.normal(), 0.0);
    } else {
      const double sd = std::sqrt(0.5 * var);
      const double re = sd * rng.normal();
      const double im = sd * rng.normal();
      modes[k] = Complex(re, im);
      modes[kc] = Complex(re, -im);
    }
  }
  if (spec.zero_dc) modes[0] = Complex(0.0, 0.0);
  return idft(spec.grid, modes);
}

}  // namespace grpde
