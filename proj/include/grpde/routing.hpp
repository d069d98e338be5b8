#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "grpde/error.hpp"
#include "grpde/grid.hpp"
#include "grpde/nn/lstm_router.hpp"
#include "grpde/operator.hpp"
#include "grpde/solvers.hpp"

namespace grpde {

/// Ordered solver collection sharing one operator. Ids run 1..K in order.
struct Ensemble {
  DiscreteOperator op;
  std::vector<SolverHandle> solvers;

  std::size_t size() const noexcept { return solvers.size(); }
  const SolverHandle& at(int id) const;  // BadId
};

/// Throws InvalidArgument for an empty list and BadId unless ids are 1..K.
Ensemble make_ensemble(const DiscreteOperator& op, std::vector<SolverHandle> solvers);

struct SingleSolver {
  int id = 1;
};
struct Hints {
  int neural_id = 2;
  int classical_id = 1;
  int tau = 25;
};
struct GreedyOracle {};
struct Learned {
  std::shared_ptr<const nn::LstmRouter> model;
};

using Policy = std::variant<SingleSolver, Hints, GreedyOracle, Learned>;

/// Checks that the ids a policy references exist and that τ ≥ 2.
void validate_policy(const Ensemble& ens, const Policy& policy);

/// Per-step record of a hybrid run; entry t of the norm vectors belongs to
/// iterate u^(t), so they hold steps() + 1 values.
struct RouteTrace {
  std::vector<int> chosen;  // S_1..S_T
  std::vector<double> error_norm;
  std::vector<double> residual_norm;
  std::vector<std::vector<double>> costs;  // cost vector seen before step t+1, oracle runs only
  Field final_iterate;

  std::size_t steps() const noexcept { return chosen.size(); }

  /// Columns step, chosen_id, error_norm, residual_norm[, cost_1..cost_K].
  /// Row 0 is the initial iterate (chosen_id 0, empty costs).
  void write_csv(std::ostream& out) const;
};

/// Thrown when an iterate stops being finite; carries the trace up to and
/// including the offending step.
class DivergedError : public Error {
 public:
  DivergedError(const std::string& message, RouteTrace trace)
      : Error(Errc::DivergedIterate, message), trace_(std::move(trace)) {}
  const RouteTrace& trace() const noexcept { return trace_; }

 private:
  RouteTrace trace_;
};

/// Error of `u` against the reference, projected to zero mean for singular operators.
Field iterate_error(const Ensemble& ens, const Field& u, const Field& u_ref);

/// (I - C_j L) e, projected to zero mean for singular operators.
Field propagate_error(const Ensemble& ens, int id, const Field& e);

/// c_j = ||(I - C_j L) e||² for every solver.
std::vector<double> step_costs(const Ensemble& ens, const Field& e);

/// argmin, ties to the lowest id. EmptyCosts for an empty vector.
int greedy_select(std::span<const double> costs);

/// Neural id when t mod τ == 0, classical id otherwise (t ≥ 1).
int hints_select(int t, const Hints& hints);

/// argmax, ties to the lowest id.
int argmax_select(std::span<const double> logits);

/// Router features: [r / rms(r), f / rms(f)], zero blocks where the rms is 0.
Eigen::VectorXd router_features(const Field& r, const Field& f);

/// One router step for a single trajectory; advances `state`.
int learned_select(const nn::LstmRouter& model, const Eigen::VectorXd& features, nn::LstmState& state);

struct RunOptions {
  const Field* u0 = nullptr;     // zero iterate when null
  const Field* u_ref = nullptr;  // computed spectrally when null
  bool record_costs = false;     // always on for GreedyOracle
};

/// u^(t+1) = u^(t) + C_{S_t}(f - L u^(t)) for t = 0..T-1.
RouteTrace run_hybrid(const Ensemble& ens, const Policy& policy, const Field& f, int T, const RunOptions& opts = {});

}  // namespace grpde
