#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "grpde/cli/config.hpp"
#include "grpde/neural_solver.hpp"
#include "grpde/routing.hpp"
#include "grpde/theory.hpp"

namespace grpde::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // I/O and other runtime errors
inline constexpr int kExitConfig = 2;   // bad config, missing checkpoint
inline constexpr int kExitDiverged = 3;

/// Loads checkpoints lazily and builds ensembles and policies from specs.
class Workspace {
 public:
  explicit Workspace(ExperimentConfig cfg);

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const DiscreteOperator& op() const noexcept { return op_; }

  std::shared_ptr<const NeuralSolver> surrogate();
  std::shared_ptr<const nn::LstmRouter> router();

  Ensemble ensemble(const std::vector<SolverSpec>& specs);
  Policy policy(const PolicySpec& spec);
  Dataset dataset(const std::string& split) const;

 private:
  ExperimentConfig cfg_;
  DiscreteOperator op_;
  std::shared_ptr<const NeuralSolver> surrogate_;
  std::shared_ptr<const nn::LstmRouter> router_;
};

int cmd_generate_data(Workspace& ws, std::ostream& out);
int cmd_train_deeponet(Workspace& ws, std::ostream& out);
int cmd_train_router(Workspace& ws, std::ostream& out);
int cmd_run(Workspace& ws, std::ostream& out);
int cmd_compare(Workspace& ws, std::ostream& out);
int cmd_verify_theory(Workspace& ws, std::ostream& out);

/// The randomized theory checks behind verify-theory.
std::vector<PropertyReport> theory_suite(const TheorySpec& spec);

/// Entry point: greedy-route-pde <subcommand> --config <path> [--seed N] [--out DIR]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace grpde::cli
