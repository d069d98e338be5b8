#include "grpde/routing.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "grpde/spectral.hpp"

namespace grpde {

const SolverHandle& Ensemble::at(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) > solvers.size()) {
    throw Error(Errc::BadId, "solver id " + std::to_string(id) + " outside 1.." + std::to_string(solvers.size()));
  }
  return solvers[static_cast<std::size_t>(id - 1)];
}

Ensemble make_ensemble(const DiscreteOperator& op, std::vector<SolverHandle> solvers) {
  if (solvers.empty()) throw Error(Errc::InvalidArgument, "an ensemble needs at least one solver");
  for (std::size_t k = 0; k < solvers.size(); ++k) {
    if (solvers[k].id != static_cast<int>(k + 1)) {
      throw Error(Errc::BadId, "solver at position " + std::to_string(k + 1) + " has id " +
                                   std::to_string(solvers[k].id));
    }
  }
  return Ensemble{op, std::move(solvers)};
}

void validate_policy(const Ensemble& ens, const Policy& policy) {
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SingleSolver>) {
          ens.at(p.id);
        } else if constexpr (std::is_same_v<P, Hints>) {
          if (p.tau < 2) throw Error(Errc::BadTau, "HINTS period must be at least 2, got " + std::to_string(p.tau));
          ens.at(p.neural_id);
          ens.at(p.classical_id);
        } else if constexpr (std::is_same_v<P, Learned>) {
          if (!p.model) throw Error(Errc::InvalidArgument, "learned policy has no router model");
          if (p.model->spec().outputs != ens.size()) {
            throw Error(Errc::ShapeMismatch, "router predicts " + std::to_string(p.model->spec().outputs) +
                                                 " solvers, ensemble has " + std::to_string(ens.size()));
          }
        }
      },
      policy);
}

void RouteTrace::write_csv(std::ostream& out) const {
  std::size_t k = 0;
  for (const auto& c : costs) k = std::max(k, c.size());
  out << "step,chosen_id,error_norm,residual_norm";
  for (std::size_t j = 1; j <= k; ++j) out << ",cost_" << j;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t t = 0; t < error_norm.size(); ++t) {
    out << t << ',' << (t == 0 ? 0 : chosen[t - 1]) << ',' << error_norm[t] << ',' << residual_norm[t];
    if (k > 0) {
      const bool has = t >= 1 && t - 1 < costs.size();
      for (std::size_t j = 0; j < k; ++j) {
        out << ',';
        if (has) out << costs[t - 1][j];
      }
    }
    out << '\n';
  }
}

Field iterate_error(const Ensemble& ens, const Field& u, const Field& u_ref) {
  Field e = u_ref - u;
  return ens.op.singular() ? project_zero_mean(e) : e;
}

Field propagate_error(const Ensemble& ens, int id, const Field& e) {
  Field next = e - apply_solver(ens.at(id), ens.op, apply_operator(ens.op, e));
  return ens.op.singular() ? project_zero_mean(next) : next;
}

std::vector<double> step_costs(const Ensemble& ens, const Field& e) {
  require_same_grid(ens.op.grid, e.grid(), "step_costs");
  std::vector<double> c(ens.size());
  for (std::size_t j = 0; j < ens.size(); ++j) c[j] = propagate_error(ens, static_cast<int>(j + 1), e).squared_norm();
  return c;
}

int greedy_select(std::span<const double> costs) {
  if (costs.empty()) throw Error(Errc::EmptyCosts, "cannot select from an empty cost vector");
  std::size_t best = 0;
  for (std::size_t j = 1; j < costs.size(); ++j) {
    if (costs[j] < costs[best]) best = j;
  }
  return static_cast<int>(best + 1);
}

int hints_select(int t, const Hints& hints) {
  if (hints.tau < 2) throw Error(Errc::BadTau, "HINTS period must be at least 2, got " + std::to_string(hints.tau));
  if (t < 1) throw Error(Errc::InvalidArgument, "HINTS step index starts at 1");
  return t % hints.tau == 0 ? hints.neural_id : hints.classical_id;
}

int argmax_select(std::span<const double> logits) {
  if (logits.empty()) throw Error(Errc::EmptyCosts, "cannot select from empty logits");
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.size(); ++j) {
    if (logits[j] > logits[best]) best = j;
  }
  return static_cast<int>(best + 1);
}

Eigen::VectorXd router_features(const Field& r, const Field& f) {
  require_same_grid(r.grid(), f.grid(), "router_features");
  const auto n = static_cast<Eigen::Index>(r.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n);
  const double rr = r.rms();
  const double rf = f.rms();
  if (rr > 0.0) x.head(n) = Eigen::Map<const Eigen::VectorXd>(r.data().data(), n) / rr;
  if (rf > 0.0) x.tail(n) = Eigen::Map<const Eigen::VectorXd>(f.data().data(), n) / rf;
  return x;
}

int learned_select(const nn::LstmRouter& model, const Eigen::VectorXd& features, nn::LstmState& state) {
  const Eigen::MatrixXd logits = model.step(features, state);
  return argmax_select(std::span<const double>(logits.data(), static_cast<std::size_t>(logits.size())));
}

RouteTrace run_hybrid(const Ensemble& ens, const Policy& policy, const Field& f, int T, const RunOptions& opts) {
  if (T < 0) throw Error(Errc::InvalidArgument, "iteration count must be non-negative");
  require_same_grid(ens.op.grid, f.grid(), "run_hybrid");
  validate_policy(ens, policy);
  const Field u_ref = opts.u_ref ? *opts.u_ref : reference_solution(ens.op, f);
  Field u = opts.u0 ? *opts.u0 : Field(ens.op.grid);
  require_same_grid(ens.op.grid, u.grid(), "run_hybrid initial iterate");

  const bool oracle = std::holds_alternative<GreedyOracle>(policy);
  const bool want_costs = oracle || opts.record_costs;
  const Learned* learned = std::get_if<Learned>(&policy);
  nn::LstmState state;
  if (learned) state = learned->model->initial_state(1);

  RouteTrace trace;
  trace.chosen.reserve(static_cast<std::size_t>(T));
  Field r = residual(ens.op, u, f);
  Field e = iterate_error(ens, u, u_ref);
  trace.error_norm.push_back(e.norm());
  trace.residual_norm.push_back(r.norm());

  for (int t = 1; t <= T; ++t) {
    std::vector<double> costs;
    if (want_costs) costs = step_costs(ens, e);
    int id = 1;
    if (const auto* p = std::get_if<SingleSolver>(&policy)) {
      id = p->id;
    } else if (const auto* h = std::get_if<Hints>(&policy)) {
      id = hints_select(t, *h);
    } else if (oracle) {
      id = greedy_select(costs);
    } else {
      id = learned_select(*learned->model, router_features(r, f), state);
    }
    u += apply_solver(ens.at(id), ens.op, r);
    r = residual(ens.op, u, f);
    e = iterate_error(ens, u, u_ref);
    trace.chosen.push_back(id);
    trace.error_norm.push_back(e.norm());
    trace.residual_norm.push_back(r.norm());
    if (want_costs) trace.costs.push_back(std::move(costs));
    if (!u.all_finite()) {
      trace.final_iterate = u;
      throw DivergedError("iterate became non-finite at step " + std::to_string(t), std::move(trace));
    }
  }
  trace.final_iterate = std::move(u);
  return trace;
}

}  // namespace grpde
