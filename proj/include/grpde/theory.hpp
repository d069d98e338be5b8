#pragma once

#include <span>
#include <string>
#include <vector>

#include "grpde/routing.hpp"

namespace grpde {

using Sequence = std::vector<int>;

/// h(S) = ||(I - C_{S_T} L) ... (I - C_{S_1} L) e0||², zero-mean subspace for
/// singular operators. The empty sequence gives ||e0||².
double sequence_value(const Ensemble& ens, std::span<const int> seq, const Field& e0);

/// Greedy sequence of length T chosen on the true error at every step.
Sequence greedy_sequence(const Ensemble& ens, const Field& e0, int T);

struct OptimalSequence {
  Sequence sequence;
  double value = 0.0;
};

/// Exhaustive minimum over all K^T sequences of length T (ties to the
/// lexicographically smallest). SearchTooLarge when K^T > 1e6.
OptimalSequence brute_force_optimal(const Ensemble& ens, const Field& e0, int T);

/// Spectral norm of I - C_j L (restricted to zero-mean fields for singular
/// operators) by power iteration on MᵀM.
double lipschitz_constant(const SolverHandle& handle, const DiscreteOperator& op);

/// max{4 / (T - Σρ²), 1}; DegenerateDenominator when Σρ² >= T.
double alpha_of(std::span<const double> rho, int T);

/// (1 - 1/(αT))^T; infinite α gives 1.
double phi(double alpha, int T);

struct BoundReport {
  double greedy_value = 0.0;
  double optimal_value = 0.0;
  double empty_value = 0.0;
  double alpha = 1.0;  // +inf when the closed form degenerates
  double phi = 0.0;
  double bound = 0.0;
  bool satisfied = false;
  bool contractive = true;  // every ρ used for α is < 1
  Sequence greedy;
  Sequence optimal;
};

/// Compares the greedy value with (1 - φ) h(O) + φ h(∅).
BoundReport greedy_bound_check(const Ensemble& ens, const Field& e0, int T);

/// h(S) from the shared DFT eigenbasis: Σ_i z_i² Π_j λ_{ji}^{2 m_j(S)}.
/// Weighted Jacobi only; NotSimultaneouslyDiagonalizable otherwise.
double spectral_value(const Ensemble& ens, std::span<const int> seq, const Field& e0);

struct PropertyReport {
  PropertyReport() = default;
  explicit PropertyReport(std::string n) : name(std::move(n)) {}

  std::string name;
  long long checks = 0;
  long long violations = 0;
  double worst_slack = 0.0;  // most negative margin seen (>= 0 when all hold)
  std::string first_violation;
};

/// Exhaustive check over all prefix pairs S ⪯ S' (|S'| <= T) and solvers ω of
///   h(S) - h(S⊕ω) >= h(S') - h(S'⊕ω)
/// and of the α = 1 weak form
///   h(S) - h(S⊕S') <= Σ_i h(S) - h(S⊕S'_i)   for |S| = |S'| <= T.
/// `slack` is absolute. Returns the two reports in that order.
std::vector<PropertyReport> supermodularity_check(const Ensemble& ens, const Field& e0, int T, double slack = 1e-12);

/// h(S'⊕S) <= h(S) over all S, S' with |S| + |S'| <= T.
PropertyReport postfix_monotonicity_check(const Ensemble& ens, const Field& e0, int T, double slack = 1e-12);

/// Σ_j Σ_{k≠j} c_k 1{chosen≠j} - (K-2) Σ_j c_j, which equals c_chosen.
double route_loss_rewrite(std::span<const double> costs, int chosen);
bool route_loss_rewrite_holds(std::span<const double> costs, int chosen, double tol = 1e-10);

/// log(2) c_{argmax g} <= Ψ(c, g).
bool surrogate_bound_holds(std::span<const double> costs, std::span<const double> logits, double tol = 1e-10);

}  // namespace grpde
