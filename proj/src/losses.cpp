#include "grpde/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "grpde/error.hpp"

namespace grpde {

namespace {

void check_lengths(std::span<const double> costs, std::span<const double> logits) {
  if (costs.empty()) throw Error(Errc::EmptyCosts, "surrogate loss needs at least one cost");
  if (costs.size() != logits.size()) {
    throw Error(Errc::LengthMismatch, std::to_string(costs.size()) + " costs but " + std::to_string(logits.size()) +
                                          " logits");
  }
}

std::vector<double> log_softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double g : logits) s += std::exp(g - m);
  const double lse = m + std::log(s);
  std::vector<double> out(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) out[j] = logits[j] - lse;
  return out;
}

}  // namespace

double routing_loss(std::span<const double> costs, int chosen) {
  if (chosen < 1 || static_cast<std::size_t>(chosen) > costs.size()) {
    throw Error(Errc::BadId, "chosen id " + std::to_string(chosen) + " outside 1.." + std::to_string(costs.size()));
  }
  return costs[static_cast<std::size_t>(chosen - 1)];
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  std::vector<double> p = log_softmax(logits);
  for (double& v : p) v = std::exp(v);
  return p;
}

std::vector<double> surrogate_weights(std::span<const double> costs) {
  const double total = std::accumulate(costs.begin(), costs.end(), 0.0);
  std::vector<double> w(costs.size());
  for (std::size_t j = 0; j < costs.size(); ++j) w[j] = total - costs[j];
  return w;
}

double surrogate_loss(std::span<const double> costs, std::span<const double> logits) {
  check_lengths(costs, logits);
  const std::vector<double> w = surrogate_weights(costs);
  const std::vector<double> lp = log_softmax(logits);
  double psi = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] != 0.0) psi -= w[j] * lp[j];
  }
  return psi;
}

std::vector<double> surrogate_grad(std::span<const double> costs, std::span<const double> logits) {
  check_lengths(costs, logits);
  const std::vector<double> w = surrogate_weights(costs);
  const std::vector<double> p = softmax(logits);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> g(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) g[j] = total * p[j] - w[j];
  return g;
}

}  // namespace grpde
