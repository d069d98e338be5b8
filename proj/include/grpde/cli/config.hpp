#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "grpde/dataset.hpp"
#include "grpde/solvers.hpp"
#include "grpde/training.hpp"
#include "json.hpp"

namespace grpde::cli {

struct DataSplit {
  std::string path;
  std::size_t count = 0;
  std::uint64_t seed = 0;
};

struct SolverSpec {
  std::string kind;  // jacobi | gauss_seidel | multigrid | deeponet
  double omega = 1.0;
  bool mg_default = true;
  MgConfig mg;
  std::string label;
};

struct PolicySpec {
  std::string kind = "single";  // single | hints | greedy | learned
  int id = 1;
  int neural_id = 2;
  int classical_id = 1;
  int tau = 25;
};

struct CompareEntry {
  std::string name;
  PolicySpec policy;
  int T = 300;
  std::vector<SolverSpec> ensemble;  // empty: use the top-level ensemble
};

struct TheorySpec {
  std::uint64_t seed = 7;
  int n = 8;
  int bound_trials = 200;
  int max_k = 3;
  int max_t = 5;
  int spectral_trials = 100;
  int spectral_max_t = 8;
  int supermodular_t = 4;
  int loss_trials = 10000;
};

struct ExperimentConfig {
  Equation equation = Equation::Poisson;
  int dim = 1;
  int n = 64;
  double a2 = 1.0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  double grf_shift = 9.0;
  double grf_power = 2.0;

  std::map<std::string, DataSplit> data;

  DeepOnetTrainConfig deeponet;
  std::string deeponet_checkpoint = "deeponet.grck";
  bool normalize_residual = true;

  RouterTrainConfig router;
  std::string router_checkpoint = "router.grck";

  std::vector<SolverSpec> ensemble;
  PolicySpec policy;
  int T = 300;
  std::size_t trace_instances = 1;
  std::vector<CompareEntry> compare;
  std::vector<int> modes;

  TheorySpec theory;

  GridSpec grid() const { return GridSpec{dim, n}; }
  std::filesystem::path resolve(const std::string& file) const { return out_dir / file; }
};

/// Parses and validates a configuration; every failure is ConfigParse with a
/// message naming the offending key. Missing keys take their defaults.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace grpde::cli
