#include "grpde/cli/config.hpp"

#include <cmath>
#include <fstream>

#include "grpde/error.hpp"

namespace grpde::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw Error(Errc::ConfigParse, "config key '" + key + "': " + what);
}

template <class T>
T get(const json& j, const std::string& key, const T& fallback, const std::string& path) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(path + key, std::string("wrong type (") + e.what() + ")");
  }
}

const json& object_or_empty(const json& j, const std::string& key, const std::string& path) {
  static const json empty = json::object();
  if (!j.contains(key) || j.at(key).is_null()) return empty;
  if (!j.at(key).is_object()) fail(path + key, "expected an object");
  return j.at(key);
}

SolverSpec parse_solver(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  SolverSpec s;
  s.kind = get<std::string>(j, "kind", "", path + ".");
  if (s.kind == "jacobi") {
    s.omega = get<double>(j, "omega", 1.0, path + ".");
    if (!(s.omega > 0.0 && s.omega <= 1.0)) fail(path + ".omega", "must lie in (0, 1]");
  } else if (s.kind == "multigrid") {
    if (j.contains("levels")) {
      s.mg_default = false;
      s.mg.levels = get<int>(j, "levels", 2, path + ".");
    }
    s.mg.pre_smooth = get<int>(j, "pre_smooth", 3, path + ".");
    s.mg.post_smooth = get<int>(j, "post_smooth", 3, path + ".");
    s.mg.omega = get<double>(j, "omega", 2.0 / 3.0, path + ".");
    s.mg.coarsest_n = get<int>(j, "coarsest_n", 4, path + ".");
  } else if (s.kind != "gauss_seidel" && s.kind != "deeponet") {
    fail(path + ".kind", "unknown solver kind '" + s.kind + "' (jacobi, gauss_seidel, multigrid, deeponet)");
  }
  s.label = get<std::string>(j, "label", "", path + ".");
  return s;
}

std::vector<SolverSpec> parse_ensemble(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a non-empty list of solvers");
  std::vector<SolverSpec> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(parse_solver(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

PolicySpec parse_policy(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  PolicySpec p;
  p.kind = get<std::string>(j, "kind", "single", path + ".");
  if (p.kind != "single" && p.kind != "hints" && p.kind != "greedy" && p.kind != "learned") {
    fail(path + ".kind", "unknown policy '" + p.kind + "' (single, hints, greedy, learned)");
  }
  p.id = get<int>(j, "id", 1, path + ".");
  p.neural_id = get<int>(j, "neural_id", 2, path + ".");
  p.classical_id = get<int>(j, "classical_id", 1, path + ".");
  p.tau = get<int>(j, "tau", 25, path + ".");
  if (p.kind == "hints" && p.tau < 2) fail(path + ".tau", "must be at least 2");
  return p;
}

void check_ids(const PolicySpec& p, std::size_t k, const std::string& path) {
  auto in_range = [&](int id) { return id >= 1 && static_cast<std::size_t>(id) <= k; };
  if (p.kind == "single" && !in_range(p.id)) fail(path + ".id", "no solver with this id in the ensemble");
  if (p.kind == "hints" && (!in_range(p.neural_id) || !in_range(p.classical_id))) {
    fail(path, "HINTS ids must reference ensemble members");
  }
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw Error(Errc::ConfigParse, "configuration must be a JSON object");
  ExperimentConfig c;
  try {
    c.equation = parse_equation(get<std::string>(j, "equation", "poisson", ""));
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigParse) throw;
    fail("equation", e.what());
  }
  c.dim = get<int>(j, "dim", 1, "");
  if (c.dim != 1 && c.dim != 2) fail("dim", "must be 1 or 2");
  c.n = get<int>(j, "n", 64, "");
  if (c.n < 4) fail("n", "must be at least 4");
  c.a2 = get<double>(j, "a2", 1.0, "");
  if (!(c.a2 >= 0.0)) fail("a2", "must be non-negative");
  c.seed = get<std::uint64_t>(j, "seed", 0, "");
  c.out_dir = get<std::string>(j, "output_dir", "out", "");
  c.T = get<int>(j, "T", 300, "");
  if (c.T < 1) fail("T", "must be at least 1");
  c.trace_instances = get<std::size_t>(j, "trace_instances", 1, "");

  const json& grf = object_or_empty(j, "grf", "");
  c.grf_shift = get<double>(grf, "shift", 9.0, "grf.");
  c.grf_power = get<double>(grf, "power", 2.0, "grf.");
  if (!(c.grf_shift > 0.0)) fail("grf.shift", "must be positive");
  if (!(c.grf_power >= 1.0)) fail("grf.power", "must be at least 1");

  const std::vector<std::pair<std::string, std::size_t>> splits{
      {"train", 2000}, {"val", 500}, {"test", 64}, {"router_train", 64}, {"router_val", 32}};
  const json& data = object_or_empty(j, "data", "");
  std::uint64_t offset = 1;
  for (const auto& [name, count] : splits) {
    const json& d = object_or_empty(data, name, "data.");
    DataSplit s;
    s.path = get<std::string>(d, "path", name + ".grds", "data." + name + ".");
    s.count = get<std::size_t>(d, "count", count, "data." + name + ".");
    s.seed = get<std::uint64_t>(d, "seed", c.seed + offset++, "data." + name + ".");
    c.data[name] = s;
  }

  const json& don = object_or_empty(j, "deeponet", "");
  const std::string dp = "deeponet.";
  c.deeponet_checkpoint = get<std::string>(don, "checkpoint", "deeponet.grck", dp);
  c.normalize_residual = get<bool>(don, "normalize_residual", true, dp);
  c.deeponet.arch.branch_hidden = get<std::vector<std::size_t>>(don, "branch_hidden", {128, 128}, dp);
  c.deeponet.arch.trunk_hidden = get<std::vector<std::size_t>>(don, "trunk_hidden", {128, 128}, dp);
  c.deeponet.arch.width = get<std::size_t>(don, "width", 64, dp);
  try {
    c.deeponet.arch.activation = nn::parse_activation(get<std::string>(don, "activation", "tanh", dp));
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigParse) throw;
    fail("deeponet.activation", e.what());
  }
  c.deeponet.arch.bias_free = get<bool>(don, "bias_free", true, dp);
  c.deeponet.adam.lr = get<double>(don, "lr", 1e-3, dp);
  c.deeponet.adam.weight_decay = get<double>(don, "weight_decay", 0.005, dp);
  c.deeponet.clip_norm = get<double>(don, "clip", 1.0, dp);
  c.deeponet.batch = get<std::size_t>(don, "batch", 128, dp);
  c.deeponet.epochs = get<int>(don, "epochs", 100, dp);
  c.deeponet.seed = get<std::uint64_t>(don, "seed", c.seed, dp);
  if (c.deeponet.batch == 0) fail("deeponet.batch", "must be positive");
  if (c.deeponet.arch.width == 0) fail("deeponet.width", "must be positive");

  const json& rt = object_or_empty(j, "router", "");
  const std::string rp = "router.";
  c.router_checkpoint = get<std::string>(rt, "checkpoint", "router.grck", rp);
  c.router.arch.encoder = get<std::size_t>(rt, "encoder", 64, rp);
  c.router.arch.hidden = get<std::size_t>(rt, "hidden", 64, rp);
  c.router.arch.layers = get<std::size_t>(rt, "layers", 3, rp);
  c.router.adam.lr = get<double>(rt, "lr", 1e-3, rp);
  c.router.adam.weight_decay = get<double>(rt, "weight_decay", 0.005, rp);
  c.router.clip_norm = get<double>(rt, "clip", 1.0, rp);
  c.router.batch = get<std::size_t>(rt, "batch", 32, rp);
  c.router.epochs = get<int>(rt, "epochs", 100, rp);
  c.router.seed = get<std::uint64_t>(rt, "seed", c.seed, rp);
  c.router.horizon = get<int>(rt, "horizon", c.T, rp);
  c.router.normalize_costs = get<bool>(rt, "normalize_costs", true, rp);
  ScheduleConfig& s = c.router.schedule;
  s.t_max = c.router.horizon;
  s.ss_start = get<double>(rt, "ss_start", 1.0, rp);
  s.gamma_tf = get<double>(rt, "gamma_tf", 0.95, rp);
  s.ss_end = get<double>(rt, "ss_end", 0.0, rp);
  s.warmup = get<int>(rt, "warmup", 10, rp);
  s.w_start = get<int>(rt, "w_start", std::max(1, static_cast<int>(std::floor(0.1 * s.t_max))), rp);
  s.gamma_bptt = get<double>(rt, "gamma_bptt", 1.25, rp);
  s.f_bptt = get<int>(rt, "f_bptt", 4, rp);
  if (c.router.batch == 0) fail("router.batch", "must be positive");
  try {
    validate_schedule(s);
  } catch (const Error& e) {
    fail("router", e.what());
  }

  if (j.contains("ensemble")) {
    c.ensemble = parse_ensemble(j.at("ensemble"), "ensemble");
  } else {
    c.ensemble = {SolverSpec{"jacobi", 1.0, true, {}, ""}};
  }
  if (j.contains("policy")) c.policy = parse_policy(j.at("policy"), "policy");
  check_ids(c.policy, c.ensemble.size(), "policy");

  if (j.contains("compare")) {
    const json& list = j.at("compare");
    if (!list.is_array()) fail("compare", "expected a list of policies");
    for (std::size_t k = 0; k < list.size(); ++k) {
      const std::string path = "compare[" + std::to_string(k) + "]";
      const json& e = list[k];
      if (!e.is_object()) fail(path, "expected an object");
      CompareEntry entry;
      entry.name = get<std::string>(e, "name", "policy " + std::to_string(k + 1), path + ".");
      entry.T = get<int>(e, "T", c.T, path + ".");
      if (entry.T < 1) fail(path + ".T", "must be at least 1");
      if (e.contains("ensemble")) entry.ensemble = parse_ensemble(e.at("ensemble"), path + ".ensemble");
      if (!e.contains("policy")) fail(path + ".policy", "missing");
      entry.policy = parse_policy(e.at("policy"), path + ".policy");
      check_ids(entry.policy, entry.ensemble.empty() ? c.ensemble.size() : entry.ensemble.size(), path + ".policy");
      c.compare.push_back(std::move(entry));
    }
  }

  c.modes = get<std::vector<int>>(j, "modes", {1, 5, 10}, "");
  for (int m : c.modes) {
    if (m < 0 || m > c.n / 2) fail("modes", "mode " + std::to_string(m) + " outside 0.." + std::to_string(c.n / 2));
  }

  const json& th = object_or_empty(j, "theory", "");
  const std::string tp = "theory.";
  c.theory.seed = get<std::uint64_t>(th, "seed", c.seed + 7, tp);
  c.theory.n = get<int>(th, "n", 8, tp);
  c.theory.bound_trials = get<int>(th, "bound_trials", 200, tp);
  c.theory.max_k = get<int>(th, "max_k", 3, tp);
  c.theory.max_t = get<int>(th, "max_T", 5, tp);
  c.theory.spectral_trials = get<int>(th, "spectral_trials", 100, tp);
  c.theory.spectral_max_t = get<int>(th, "spectral_max_T", 8, tp);
  c.theory.supermodular_t = get<int>(th, "supermodular_T", 4, tp);
  c.theory.loss_trials = get<int>(th, "loss_trials", 10000, tp);
  if (c.theory.n < 4) fail("theory.n", "must be at least 4");
  if (c.theory.max_k < 1 || c.theory.max_t < 1) fail("theory", "max_k and max_T must be positive");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ConfigParse, "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ConfigParse, path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace grpde::cli
