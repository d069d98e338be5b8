#pragma once

#include <span>

#include "grpde/grid.hpp"
#include "grpde/routing.hpp"

namespace grpde {

/// Magnitude of the DFT content of `e` at mode m, combining +m and -m.
/// In 2D the shell is max(|k0|, |k1|) = m. Valid for 0 <= m <= n/2 (BadMode
/// otherwise); summing the squares over all m recovers ||e||².
double mode_error(const Field& e, int m);

double final_error(const RouteTrace& trace);

/// Σ_{t=1..T} ||e^(t)||, or the sum of squares when `squared`.
double error_auc(const RouteTrace& trace, bool squared = false);

struct ResidualMetrics {
  double final_residual = 0.0;
  double auc = 0.0;  // Σ_{t=1..T} ||r^(t)||²
};

ResidualMetrics residual_metrics(const RouteTrace& trace);

/// Steps where the error grew by more than a relative 1e-12.
int error_increases(const RouteTrace& trace);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(count)
};

MeanSe mean_se(std::span<const double> values);

}  // namespace grpde
