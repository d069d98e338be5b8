#include "grpde/cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "grpde/error.hpp"
#include "grpde/losses.hpp"
#include "grpde/metrics.hpp"
#include "grpde/nn/checkpoint.hpp"
#include "grpde/spectral.hpp"
#include "grpde/training.hpp"

namespace grpde::cli {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

std::string solver_label(const SolverSpec& s, const SolverHandle& h) { return s.label.empty() ? h.label : s.label; }

// Zero-mean (for Poisson) random field of unit norm.
Field random_error(const GridSpec& grid, Rng& rng, bool zero_mean) {
  Field e(grid);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = rng.normal();
  if (zero_mean) e = project_zero_mean(e);
  e *= 1.0 / e.norm();
  return e;
}

void merge(PropertyReport& into, const PropertyReport& from) {
  into.checks += from.checks;
  if (from.violations && !into.violations) into.first_violation = from.first_violation;
  into.violations += from.violations;
  into.worst_slack = std::min(into.worst_slack, from.worst_slack);
}

}  // namespace

Workspace::Workspace(ExperimentConfig cfg)
    : cfg_(std::move(cfg)), op_(make_operator(cfg_.grid(), cfg_.equation, cfg_.a2)) {}

std::shared_ptr<const NeuralSolver> Workspace::surrogate() {
  if (!surrogate_) {
    const auto path = cfg_.resolve(cfg_.deeponet_checkpoint);
    if (!std::filesystem::exists(path)) {
      throw Error(Errc::MissingCheckpoint,
                  "DeepONet checkpoint " + path.string() + " not found; run train-deeponet with this config first");
    }
    nn::DeepOnet model = nn::load_deeponet(path);
    if (model.spec().grid != cfg_.grid()) {
      throw Error(Errc::GridMismatch, "DeepONet checkpoint was trained on a different grid");
    }
    surrogate_ = std::make_shared<const NeuralSolver>(std::move(model), cfg_.normalize_residual);
  }
  return surrogate_;
}

std::shared_ptr<const nn::LstmRouter> Workspace::router() {
  if (!router_) {
    const auto path = cfg_.resolve(cfg_.router_checkpoint);
    if (!std::filesystem::exists(path)) {
      throw Error(Errc::MissingCheckpoint,
                  "router checkpoint " + path.string() + " not found; run train-router with this config first");
    }
    router_ = std::make_shared<const nn::LstmRouter>(nn::load_router(path));
  }
  return router_;
}

Ensemble Workspace::ensemble(const std::vector<SolverSpec>& specs) {
  std::vector<SolverHandle> handles;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const SolverSpec& s = specs[k];
    const int id = static_cast<int>(k + 1);
    SolverHandle h;
    if (s.kind == "jacobi") {
      h = make_jacobi(id, s.omega);
    } else if (s.kind == "gauss_seidel") {
      h = make_gauss_seidel(id);
    } else if (s.kind == "multigrid") {
      MgConfig mg = s.mg;
      if (s.mg_default) {
        const MgConfig d = default_mg_config(op_.grid, s.mg.coarsest_n);
        mg.levels = d.levels;
      }
      h = make_vcycle(id, op_, mg);
    } else {
      h = make_neural(id, surrogate());
    }
    h.label = solver_label(s, h);
    handles.push_back(std::move(h));
  }
  return make_ensemble(op_, std::move(handles));
}

Policy Workspace::policy(const PolicySpec& spec) {
  if (spec.kind == "single") return SingleSolver{spec.id};
  if (spec.kind == "hints") return Hints{spec.neural_id, spec.classical_id, spec.tau};
  if (spec.kind == "greedy") return GreedyOracle{};
  return Learned{router()};
}

Dataset Workspace::dataset(const std::string& split) const {
  const DataSplit& s = cfg_.data.at(split);
  const auto path = cfg_.resolve(s.path);
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::IoError, "dataset " + path.string() + " not found; run generate-data with this config first");
  }
  Dataset ds = load_dataset(path);
  if (ds.grid != cfg_.grid() || ds.equation != cfg_.equation) {
    throw Error(Errc::GridMismatch, "dataset " + path.string() + " does not match the configured equation/grid");
  }
  return ds;
}

int cmd_generate_data(Workspace& ws, std::ostream& out) {
  const ExperimentConfig& c = ws.config();
  std::filesystem::create_directories(c.out_dir);
  for (const auto& [name, split] : c.data) {
    GrfSpec spec;
    spec.grid = c.grid();
    spec.shift = c.grf_shift;
    spec.power = c.grf_power;
    spec.zero_dc = c.equation == Equation::Poisson;
    spec.seed = split.seed;
    const Dataset ds = generate_dataset(spec, split.count, c.equation, c.a2);
    save_dataset(ds, c.resolve(split.path));
    out << name << ": " << ds.size() << " samples -> " << c.resolve(split.path).string() << '\n';
  }
  return kExitOk;
}

int cmd_train_deeponet(Workspace& ws, std::ostream& out) {
  const ExperimentConfig& c = ws.config();
  const Dataset train = ws.dataset("train");
  const Dataset val = ws.dataset("val");
  const DeepOnetTrainResult res = train_deeponet(train, val, c.deeponet);
  nn::save_deeponet(res.model, &res.optimizer, c.resolve(c.deeponet_checkpoint));
  std::ofstream log = open_out(c.out_dir / "deeponet_log.csv");
  write_epoch_log(log, res.log);
  out << "DeepONet: best validation loss " << res.best_val << " at epoch " << res.best_epoch << " -> "
      << c.resolve(c.deeponet_checkpoint).string() << '\n';
  return kExitOk;
}

int cmd_train_router(Workspace& ws, std::ostream& out) {
  const ExperimentConfig& c = ws.config();
  const Ensemble ens = ws.ensemble(c.ensemble);
  const Dataset train = ws.dataset("router_train");
  const Dataset val = ws.dataset("router_val");
  const RouterTrainResult res = train_router(ens, train, val, c.router);
  nn::save_router(res.model, &res.optimizer, c.resolve(c.router_checkpoint));
  std::ofstream log = open_out(c.out_dir / "router_log.csv");
  write_epoch_log(log, res.log);
  out << "router: best validation loss " << res.best_val << " at epoch " << res.best_epoch << " -> "
      << c.resolve(c.router_checkpoint).string() << '\n';
  return kExitOk;
}

int cmd_run(Workspace& ws, std::ostream& out) {
  const ExperimentConfig& c = ws.config();
  const Ensemble ens = ws.ensemble(c.ensemble);
  const Policy policy = ws.policy(c.policy);
  const Dataset test = ws.dataset("test");
  std::filesystem::create_directories(c.out_dir);

  std::ofstream metrics = open_out(c.out_dir / "run_metrics.csv");
  metrics << "instance,final_error,auc,auc_squared,final_residual,residual_auc";
  for (int m : c.modes) metrics << ",mode_" << m;
  metrics << '\n';

  std::vector<InstanceMetrics> all;
  for (std::size_t i = 0; i < test.size(); ++i) {
    RunOptions opts;
    opts.u_ref = &test.samples[i].u;
    RouteTrace trace;
    try {
      trace = run_hybrid(ens, policy, test.samples[i].f, c.T, opts);
    } catch (const DivergedError& e) {
      std::ofstream partial = open_out(c.out_dir / ("trace_" + std::to_string(i) + ".csv"));
      e.trace().write_csv(partial);
      throw;
    }
    if (i < c.trace_instances) {
      std::ofstream tf = open_out(c.out_dir / ("trace_" + std::to_string(i) + ".csv"));
      trace.write_csv(tf);
    }
    const InstanceMetrics m = instance_metrics(trace);
    const Field e = iterate_error(ens, trace.final_iterate, test.samples[i].u);
    metrics << i << ',' << m.final_error << ',' << m.auc << ',' << m.auc_squared << ',' << m.final_residual << ','
            << m.residual_auc;
    for (int mode : c.modes) metrics << ',' << mode_error(e, mode);
    metrics << '\n';
    all.push_back(m);
  }
  const EvalSummary s = summarize(std::move(all));
  out << std::setprecision(6) << "instances " << s.instances.size() << "  final error " << s.final_error.mean
      << " (se " << s.final_error.se << ")  AUC " << s.auc.mean << " (se " << s.auc.se << ")\n";
  return kExitOk;
}

int cmd_compare(Workspace& ws, std::ostream& out) {
  const ExperimentConfig& c = ws.config();
  if (c.compare.empty()) throw Error(Errc::ConfigParse, "config key 'compare': no policies listed");
  const Dataset test = ws.dataset("test");
  std::filesystem::create_directories(c.out_dir);
  std::ofstream table = open_out(c.out_dir / "compare.csv");
  table << "policy,T,final_error_mean,final_error_se,auc_mean,auc_se,residual_auc_mean,residual_auc_se\n";
  std::ofstream inst = open_out(c.out_dir / "compare_instances.csv");
  inst << "policy,instance,final_error,auc,auc_squared,final_residual,residual_auc,error_increases\n";

  char line[256];
  std::snprintf(line, sizeof line, "%-24s %4s  %-22s %-22s\n", "Policy", "T", "Final error (x1e-3)", "AUC (x1e-3)");
  out << line;
  for (const CompareEntry& entry : c.compare) {
    const Ensemble ens = ws.ensemble(entry.ensemble.empty() ? c.ensemble : entry.ensemble);
    const EvalSummary s = evaluate(ens, ws.policy(entry.policy), test, entry.T);
    table << entry.name << ',' << entry.T << ',' << s.final_error.mean << ',' << s.final_error.se << ',' << s.auc.mean
          << ',' << s.auc.se << ',' << s.residual_auc.mean << ',' << s.residual_auc.se << '\n';
    for (std::size_t i = 0; i < s.instances.size(); ++i) {
      const InstanceMetrics& m = s.instances[i];
      inst << entry.name << ',' << i << ',' << m.final_error << ',' << m.auc << ',' << m.auc_squared << ','
           << m.final_residual << ',' << m.residual_auc << ',' << m.error_increases << '\n';
    }
    char fe[64], auc[64];
    std::snprintf(fe, sizeof fe, "%.4g (%.2g)", s.final_error.mean * 1e3, s.final_error.se * 1e3);
    std::snprintf(auc, sizeof auc, "%.4g (%.2g)", s.auc.mean * 1e3, s.auc.se * 1e3);
    std::snprintf(line, sizeof line, "%-24s %4d  %-22s %-22s\n", entry.name.c_str(), entry.T, fe, auc);
    out << line;
  }
  return kExitOk;
}

std::vector<PropertyReport> theory_suite(const TheorySpec& spec) {
  const GridSpec grid{1, spec.n};
  const DiscreteOperator op = build_operator(grid, OperatorKind::Poisson);
  Rng rng(spec.seed, 0);
  std::vector<PropertyReport> reports;

  // Greedy suboptimality bound on random small ensembles.
  {
    PropertyReport rep{"greedy_bound"};
    const std::vector<double> omegas{0.5, 0.67, 1.0};
    for (int trial = 0; trial < spec.bound_trials; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_k)));
      const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.max_t)));
      std::vector<int> pool{0, 1, 2, 3};  // three Jacobi weights and Gauss-Seidel
      for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[rng.below(i)]);
      std::vector<SolverHandle> hs;
      for (int j = 0; j < k; ++j) {
        const int pick = pool[static_cast<std::size_t>(j)];
        hs.push_back(pick < 3 ? make_jacobi(j + 1, omegas[static_cast<std::size_t>(pick)]) : make_gauss_seidel(j + 1));
      }
      const Ensemble ens = make_ensemble(op, hs);
      const BoundReport b = greedy_bound_check(ens, random_error(grid, rng, true), t);
      ++rep.checks;
      rep.worst_slack = std::min(rep.worst_slack, b.bound - b.greedy_value);
      if (!b.satisfied) {
        if (!rep.violations) rep.first_violation = "trial " + std::to_string(trial);
        ++rep.violations;
      }
    }
    reports.push_back(rep);
  }

  // Spectral identity for weighted Jacobi ensembles.
  {
    PropertyReport rep{"spectral_identity"};
    const std::vector<double> omegas{0.5, 0.67, 0.75, 0.8, 1.0};
    for (int trial = 0; trial < spec.spectral_trials; ++trial) {
      const int k = 1 + static_cast<int>(rng.below(3));
      std::vector<SolverHandle> hs;
      for (int j = 0; j < k; ++j) hs.push_back(make_jacobi(j + 1, omegas[rng.below(omegas.size())]));
      const Ensemble ens = make_ensemble(op, hs);
      const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.spectral_max_t)));
      Sequence s;
      for (int i = 0; i < len; ++i) s.push_back(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k))));
      const Field e0 = random_error(grid, rng, true);
      const double direct = sequence_value(ens, s, e0);
      const double spectral = spectral_value(ens, s, e0);
      const double rel = direct > 0.0 ? std::abs(spectral - direct) / direct : std::abs(spectral);
      ++rep.checks;
      rep.worst_slack = std::min(rep.worst_slack, 1e-9 - rel);
      if (rel >= 1e-9) {
        if (!rep.violations) rep.first_violation = "trial " + std::to_string(trial);
        ++rep.violations;
      }
    }
    reports.push_back(rep);
  }

  // Supermodularity for commuting pairs.
  {
    PropertyReport strict_rep{"sequence_supermodularity"};
    PropertyReport weak_rep{"weak_supermodularity_alpha1"};
    const std::vector<std::pair<double, double>> pairs{{0.5, 1.0}, {0.67, 1.0}, {0.5, 0.75}, {0.8, 0.67}};
    for (const auto& [w1, w2] : pairs) {
      for (int trial = 0; trial < 5; ++trial) {
        const Ensemble ens = make_ensemble(op, {make_jacobi(1, w1), make_jacobi(2, w2)});
        const auto r = supermodularity_check(ens, random_error(grid, rng, true), spec.supermodular_t);
        merge(strict_rep, r[0]);
        merge(weak_rep, r[1]);
      }
    }
    reports.push_back(strict_rep);
    reports.push_back(weak_rep);
  }

  // Loss identities.
  {
    PropertyReport c2{"surrogate_upper_bound"};
    PropertyReport c1{"routing_loss_identity"};
    for (int trial = 0; trial < spec.loss_trials; ++trial) {
      const std::size_t k = 2 + rng.below(4);
      std::vector<double> c(k), g(k);
      const double scale = std::pow(10.0, 4.0 * rng.uniform() - 2.0);
      for (std::size_t j = 0; j < k; ++j) {
        c[j] = scale * rng.uniform();
        g[j] = 3.0 * rng.normal();
      }
      const double psi = surrogate_loss(c, g);
      const double lhs = std::log(2.0) * routing_loss(c, argmax_select(g));
      ++c2.checks;
      c2.worst_slack = std::min(c2.worst_slack, psi - lhs);
      if (!surrogate_bound_holds(c, g)) ++c2.violations;
      const int chosen = 1 + static_cast<int>(rng.below(k));
      ++c1.checks;
      const double diff = std::abs(route_loss_rewrite(c, chosen) - routing_loss(c, chosen));
      c1.worst_slack = std::min(c1.worst_slack, -diff);
      if (!route_loss_rewrite_holds(c, chosen)) ++c1.violations;
    }
    reports.push_back(c2);
    reports.push_back(c1);
  }
  return reports;
}

int cmd_verify_theory(Workspace& ws, std::ostream& out) {
  const ExperimentConfig& c = ws.config();
  const auto reports = theory_suite(c.theory);
  nlohmann::json j;
  j["checks"] = nlohmann::json::array();
  for (const PropertyReport& r : reports) {
    nlohmann::json e;
    e["name"] = r.name;
    e["trials"] = r.checks;
    e["violations"] = r.violations;
    e["worst_slack"] = r.worst_slack;
    if (r.violations) e["first_violation"] = r.first_violation;
    j["checks"].push_back(e);
    out << std::left << std::setw(30) << r.name << " trials " << std::setw(8) << r.checks << " violations "
        << r.violations << '\n';
  }
  std::filesystem::create_directories(c.out_dir);
  std::ofstream f = open_out(c.out_dir / "theory_report.json");
  f << j.dump(2) << '\n';
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid iterative PDE solver with greedy and learned solver routing"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  const std::vector<std::pair<std::string, std::string>> names{
      {"generate-data", "sample GRF right-hand sides and exact solutions"},
      {"train-deeponet", "train the DeepONet surrogate"},
      {"train-router", "train the LSTM router"},
      {"run", "run one routing policy on the test set"},
      {"compare", "evaluate several policies on the test set"},
      {"verify-theory", "run the randomized theory checks"}};
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, help] : names) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--seed", seed, "base seed, overriding the config");
    sub->add_option("--out", out_dir, "output directory, overriding the config");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw Error(Errc::ConfigParse, "cannot open config file " + config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::ConfigParse, config_path + ": " + e.what());
    }
    if (!j.is_object()) throw Error(Errc::ConfigParse, "configuration must be a JSON object");
    if (seed) j["seed"] = *seed;
    if (!out_dir.empty()) j["output_dir"] = out_dir;
    Workspace ws(parse_config(j));

    if (subs["generate-data"]->parsed()) return cmd_generate_data(ws, out);
    if (subs["train-deeponet"]->parsed()) return cmd_train_deeponet(ws, out);
    if (subs["train-router"]->parsed()) return cmd_train_router(ws, out);
    if (subs["run"]->parsed()) return cmd_run(ws, out);
    if (subs["compare"]->parsed()) return cmd_compare(ws, out);
    return cmd_verify_theory(ws, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.code()) {
      case Errc::ConfigParse:
      case Errc::MissingCheckpoint:
      case Errc::InvalidArgument:
      case Errc::BadId:
      case Errc::BadTau:
      case Errc::BadMode:
        return kExitConfig;
      case Errc::DivergedIterate:
        return kExitDiverged;
      default:
        return kExitFailure;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace grpde::cli
