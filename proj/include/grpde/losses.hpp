#pragma once

#include <span>
#include <vector>

namespace grpde {

/// Cost of the chosen solver (ids are 1-based). BadId when out of range.
double routing_loss(std::span<const double> costs, int chosen);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// w_j = sum of all costs except c_j.
std::vector<double> surrogate_weights(std::span<const double> costs);

/// Cost-weighted cross-entropy  Ψ = -Σ_j w_j log softmax_j(g).
/// LengthMismatch when the vectors differ in length.
double surrogate_loss(std::span<const double> costs, std::span<const double> logits);

/// ∂Ψ/∂g_j = W p_j - w_j with W = Σ_j w_j.
std::vector<double> surrogate_grad(std::span<const double> costs, std::span<const double> logits);

}  // namespace grpde
