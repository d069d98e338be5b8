#include "grpde/metrics.hpp"

#include <cmath>
#include <cstdlib>

#include "grpde/spectral.hpp"

namespace grpde {

double mode_error(const Field& e, int m) {
  const int n = e.grid().n;
  if (m < 0 || m > n / 2) {
    throw Error(Errc::BadMode, "mode " + std::to_string(m) + " outside 0.." + std::to_string(n / 2));
  }
  const std::vector<Complex> modes = dft(e);
  double energy = 0.0;
  if (e.grid().dim == 1) {
    for (int k = 0; k < n; ++k) {
      if (std::abs(signed_frequency(k, n)) == m) energy += std::norm(modes[static_cast<std::size_t>(k)]);
    }
  } else {
    for (int k0 = 0; k0 < n; ++k0) {
      for (int k1 = 0; k1 < n; ++k1) {
        const int shell = std::max(std::abs(signed_frequency(k0, n)), std::abs(signed_frequency(k1, n)));
        if (shell == m) energy += std::norm(modes[static_cast<std::size_t>(k0) * n + k1]);
      }
    }
  }
  return std::sqrt(energy);
}

double final_error(const RouteTrace& trace) { return trace.error_norm.empty() ? 0.0 : trace.error_norm.back(); }

double error_auc(const RouteTrace& trace, bool squared) {
  double s = 0.0;
  for (std::size_t t = 1; t < trace.error_norm.size(); ++t) {
    const double v = trace.error_norm[t];
    s += squared ? v * v : v;
  }
  return s;
}

ResidualMetrics residual_metrics(const RouteTrace& trace) {
  ResidualMetrics out;
  if (trace.residual_norm.empty()) return out;
  out.final_residual = trace.residual_norm.back();
  for (std::size_t t = 1; t < trace.residual_norm.size(); ++t) out.auc += trace.residual_norm[t] * trace.residual_norm[t];
  return out;
}

int error_increases(const RouteTrace& trace) {
  int count = 0;
  for (std::size_t t = 1; t < trace.error_norm.size(); ++t) {
    if (trace.error_norm[t] > (1.0 + 1e-12) * trace.error_norm[t - 1]) ++count;
  }
  return count;
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  if (values.empty()) return out;
  double s = 0.0;
  for (double v : values) s += v;
  out.mean = s / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    out.se = sd / std::sqrt(static_cast<double>(values.size()));
  }
  return out;
}

}  // namespace grpde
