#include "grpde/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "grpde/error.hpp"
#include "grpde/losses.hpp"
#include "grpde/spectral.hpp"

namespace grpde {

void validate_schedule(const ScheduleConfig& cfg) {
  if (!(0.0 <= cfg.ss_end && cfg.ss_end <= cfg.ss_start && cfg.ss_start <= 1.0)) {
    throw Error(Errc::InvalidArgument, "teacher-forcing schedule needs 0 <= ss_end <= ss_start <= 1");
  }
  if (!(cfg.gamma_tf > 0.0 && cfg.gamma_tf < 1.0)) throw Error(Errc::InvalidArgument, "gamma_tf must lie in (0, 1)");
  if (!(cfg.gamma_bptt > 1.0)) throw Error(Errc::InvalidArgument, "gamma_bptt must exceed 1");
  if (cfg.w_start < 1) throw Error(Errc::InvalidArgument, "w_start must be at least 1");
  if (cfg.f_bptt < 1) throw Error(Errc::InvalidArgument, "f_bptt must be at least 1");
  if (cfg.t_max < 1) throw Error(Errc::InvalidArgument, "t_max must be at least 1");
}

double teacher_prob(const ScheduleConfig& cfg, int epoch) {
  if (epoch <= cfg.warmup) return cfg.ss_start;
  return std::max(cfg.ss_start * std::pow(cfg.gamma_tf, epoch - cfg.warmup), cfg.ss_end);
}

int bptt_window(const ScheduleConfig& cfg, int epoch) {
  if (epoch <= cfg.warmup) return cfg.w_start;
  const int q = (epoch - cfg.warmup) / cfg.f_bptt;
  const double w = std::floor(static_cast<double>(cfg.w_start) * std::pow(cfg.gamma_bptt, q));
  if (w >= static_cast<double>(cfg.t_max)) return cfg.t_max;
  return static_cast<int>(w);
}

void write_epoch_log(std::ostream& out, const std::vector<EpochLog>& log) {
  out << "epoch,train_loss,val_loss,p_tf,w_bptt\n";
  const auto old = out.precision(17);
  for (const EpochLog& e : log) {
    out << e.epoch << ',' << e.train_loss << ',' << e.val_loss << ',' << e.p_tf << ',' << e.w_bptt << '\n';
  }
  out.precision(old);
}

namespace {

Eigen::MatrixXd stack_fields(const Dataset& ds, std::span<const std::size_t> idx, bool want_u) {
  const auto n = static_cast<Eigen::Index>(ds.grid.size());
  Eigen::MatrixXd m(n, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    const Field& v = want_u ? ds.samples[idx[c]].u : ds.samples[idx[c]].f;
    m.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Eigen::VectorXd>(v.data().data(), n);
  }
  return m;
}

double rms_over(const Dataset& ds, bool want_u) {
  double s = 0.0;
  std::size_t count = 0;
  for (const Sample& smp : ds.samples) {
    s += (want_u ? smp.u : smp.f).squared_norm();
    count += smp.f.size();
  }
  return count ? std::sqrt(s / static_cast<double>(count)) : 0.0;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

using Snapshot = std::vector<std::vector<double>>;

Snapshot snapshot(const nn::ParamList& params) {
  Snapshot s;
  for (const nn::Tensor* t : params) s.push_back(t->value);
  return s;
}

void restore(const Snapshot& s, const nn::ParamList& params) {
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = s[k];
}

}  // namespace

double deeponet_loss(const nn::DeepOnet& model, const Dataset& ds) {
  if (ds.empty()) return 0.0;
  const Eigen::MatrixXd basis = model.trunk_basis();
  const double so2 = model.output_scale() * model.output_scale();
  double total = 0.0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < ds.size(); start += 256) {
    idx.resize(std::min<std::size_t>(256, ds.size() - start));
    std::iota(idx.begin(), idx.end(), start);
    const Eigen::MatrixXd pred = model.forward_with_basis(stack_fields(ds, idx, false), basis);
    total += (pred - stack_fields(ds, idx, true)).squaredNorm();
  }
  return total / (static_cast<double>(ds.size() * ds.grid.size()) * so2);
}

DeepOnetTrainResult train_deeponet(const Dataset& train, const Dataset& val, const DeepOnetTrainConfig& cfg) {
  if (train.empty()) throw Error(Errc::EmptyDataset, "DeepONet training set is empty");
  if (cfg.batch == 0) throw Error(Errc::InvalidArgument, "batch size must be positive");
  nn::DeepOnetSpec arch = cfg.arch;
  arch.grid = train.grid;
  DeepOnetTrainResult res;
  res.model = nn::DeepOnet(arch);
  Rng init_rng(cfg.seed, 0);
  res.model.init(init_rng);
  const double s_in = rms_over(train, false);
  const double s_out = rms_over(train, true);
  res.model.set_scales(s_in > 0.0 ? s_in : 1.0, s_out > 0.0 ? s_out : 1.0);

  nn::ParamList params = res.model.parameters();
  res.optimizer = nn::Adam(cfg.adam, params);
  const double so2 = res.model.output_scale() * res.model.output_scale();
  const auto n = static_cast<double>(train.grid.size());

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Snapshot best = snapshot(params);
  res.best_val = std::numeric_limits<double>::infinity();

  nn::DeepOnetCache cache;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(cfg.seed, static_cast<std::uint64_t>(epoch));
    shuffle(order, shuffle_rng);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t count = std::min(cfg.batch, order.size() - start);
      const std::span<const std::size_t> idx(order.data() + start, count);
      const Eigen::MatrixXd f = stack_fields(train, idx, false);
      const Eigen::MatrixXd u = stack_fields(train, idx, true);
      nn::zero_grads(params);
      const Eigen::MatrixXd diff = res.model.forward_batch(f, &cache) - u;
      const double denom = n * static_cast<double>(count) * so2;
      train_sum += diff.squaredNorm() / (n * so2);
      res.model.backward(cache, (2.0 / denom) * diff);
      nn::clip_global_norm(params, cfg.clip_norm);
      res.optimizer.update(params);
    }
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = train_sum / static_cast<double>(train.size());
    log.val_loss = val.empty() ? log.train_loss : deeponet_loss(res.model, val);
    res.log.push_back(log);
    if (log.val_loss < res.best_val) {
      res.best_val = log.val_loss;
      res.best_epoch = epoch;
      best = snapshot(params);
    }
  }
  restore(best, params);
  return res;
}

TeacherRollout rollout_teacher_forced(const Ensemble& ens, const Field& f, int T, const Field* u_ref) {
  if (T < 0) throw Error(Errc::InvalidArgument, "horizon must be non-negative");
  const Field ref = u_ref ? *u_ref : reference_solution(ens.op, f);
  TeacherRollout out;
  Field u(ens.op.grid);
  out.iterates.push_back(u);
  for (int t = 0; t < T; ++t) {
    const Field e = iterate_error(ens, u, ref);
    std::vector<double> c = step_costs(ens, e);
    const int id = greedy_select(c);
    u += apply_solver(ens.at(id), ens.op, residual(ens.op, u, f));
    out.labels.push_back(id);
    out.costs.push_back(std::move(c));
    out.iterates.push_back(u);
  }
  return out;
}

namespace {

void check_surrogates(const Ensemble& ens) {
  for (const SolverHandle& h : ens.solvers) {
    if (const auto* ns = std::get_if<NeuralSurrogate>(&h.kind); ns && !ns->model) {
      throw Error(Errc::MissingSurrogate, "ensemble member " + h.label + " has no trained surrogate");
    }
  }
}

struct BatchOutcome {
  double loss_sum = 0.0;  // Σ over steps and trajectories
};

// One batch of lockstep rollouts. With `model_grad` non-null the loss
// gradient is backpropagated segment by segment into it.
BatchOutcome router_batch(const nn::LstmRouter& model, nn::LstmRouter* model_grad, const Ensemble& ens,
                          const Dataset& ds, std::span<const std::size_t> idx, const RouterTrainConfig& cfg,
                          double p_tf, int window, std::uint64_t stream_tag) {
  const std::size_t batch = idx.size();
  const int T = cfg.horizon;
  std::vector<Field> u(batch, Field(ds.grid));
  std::vector<Rng> coins;
  coins.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) coins.emplace_back(cfg.seed ^ stream_tag, idx[b]);

  nn::LstmState state = model.initial_state(batch);
  const auto n = static_cast<Eigen::Index>(ds.grid.size());
  const std::size_t k = ens.size();
  const double scale = 1.0 / (static_cast<double>(T) * static_cast<double>(batch));
  BatchOutcome out;

  std::vector<nn::LstmStepCache> caches;
  std::vector<Eigen::MatrixXd> d_logits;
  std::vector<std::vector<double>> costs(batch);
  std::vector<int> labels(batch);
  std::vector<Field> r(batch);
  Eigen::MatrixXd x(2 * n, static_cast<Eigen::Index>(batch));

  for (int seg = 0; seg < T; seg += window) {
    const int seg_end = std::min(T, seg + window);
    caches.clear();
    d_logits.clear();
    for (int t = seg; t < seg_end; ++t) {
      for (std::size_t b = 0; b < batch; ++b) {
        const Sample& s = ds.samples[idx[b]];
        r[b] = residual(ens.op, u[b], s.f);
        const Field e = iterate_error(ens, u[b], s.u);
        costs[b] = step_costs(ens, e);
        labels[b] = greedy_select(costs[b]);
        if (cfg.normalize_costs) {
          double total = 0.0;
          for (double c : costs[b]) total += c;
          for (double& c : costs[b]) c = total > 0.0 ? c / total : 0.0;
        }
        for (double c : costs[b]) {
          if (!std::isfinite(c)) {
            throw Error(Errc::DivergedIterate, "router rollout diverged at step " + std::to_string(t + 1));
          }
        }
        x.col(static_cast<Eigen::Index>(b)) = router_features(r[b], s.f);
      }
      nn::LstmStepCache* cache = nullptr;
      if (model_grad) cache = &caches.emplace_back();
      const Eigen::MatrixXd logits = model.step(x, state, cache);
      Eigen::MatrixXd dl(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(batch));
      for (std::size_t b = 0; b < batch; ++b) {
        const std::span<const double> g(logits.data() + b * k, k);
        out.loss_sum += surrogate_loss(costs[b], g);
        if (model_grad) {
          const std::vector<double> grad = surrogate_grad(costs[b], g);
          for (std::size_t j = 0; j < k; ++j) dl(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) = scale * grad[j];
        }
        const bool teacher = coins[b].bernoulli(p_tf);
        const int id = teacher ? labels[b] : argmax_select(g);
        u[b] += apply_solver(ens.at(id), ens.op, r[b]);
      }
      if (model_grad) d_logits.push_back(std::move(dl));
    }
    if (model_grad) model_grad->backward_sequence(caches, d_logits, static_cast<std::size_t>(window));
  }
  return out;
}

std::uint64_t train_tag(int epoch) { return static_cast<std::uint64_t>(epoch) << 32; }
std::uint64_t val_tag(int epoch) { return (std::uint64_t{1} << 63) | (static_cast<std::uint64_t>(epoch) << 32); }

}  // namespace

double router_loss(const nn::LstmRouter& model, const Ensemble& ens, const Dataset& ds, const RouterTrainConfig& cfg,
                   double p_tf, std::uint64_t stream_tag) {
  if (ds.empty()) return 0.0;
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t bs = std::max<std::size_t>(cfg.batch, 1);
  double total = 0.0;
  for (std::size_t start = 0; start < idx.size(); start += bs) {
    const std::size_t count = std::min(bs, idx.size() - start);
    total += router_batch(model, nullptr, ens, ds, std::span<const std::size_t>(idx.data() + start, count), cfg, p_tf,
                          std::max(cfg.horizon, 1), stream_tag)
                 .loss_sum;
  }
  return total / (static_cast<double>(ds.size()) * std::max(cfg.horizon, 1));
}

RouterTrainResult train_router(const Ensemble& ens, const Dataset& train, const Dataset& val,
                               const RouterTrainConfig& cfg, const nn::LstmRouter* initial) {
  check_surrogates(ens);
  if (train.empty()) throw Error(Errc::EmptyDataset, "router training set is empty");
  if (cfg.batch == 0) throw Error(Errc::InvalidArgument, "batch size must be positive");
  if (cfg.horizon < 1) throw Error(Errc::InvalidArgument, "router horizon must be at least 1");
  validate_schedule(cfg.schedule);
  require_same_grid(ens.op.grid, train.grid, "train_router");

  nn::LstmRouterSpec arch = cfg.arch;
  arch.input = 2 * train.grid.size();
  arch.outputs = ens.size();
  RouterTrainResult res;
  if (initial) {
    if (initial->spec().input != arch.input || initial->spec().outputs != arch.outputs) {
      throw Error(Errc::ShapeMismatch, "initial router does not match the ensemble and grid");
    }
    res.model = *initial;
  } else {
    res.model = nn::LstmRouter(arch);
    Rng init_rng(cfg.seed, 0);
    res.model.init(init_rng);
  }
  nn::ParamList params = res.model.parameters();
  res.optimizer = nn::Adam(cfg.adam, params);
  Snapshot best = snapshot(params);
  res.best_val = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double p_tf = teacher_prob(cfg.schedule, epoch);
    const int window = std::clamp(bptt_window(cfg.schedule, epoch), 1, cfg.horizon);
    Rng shuffle_rng(cfg.seed, static_cast<std::uint64_t>(epoch));
    shuffle(order, shuffle_rng);
    double train_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t count = std::min(cfg.batch, order.size() - start);
      nn::zero_grads(params);
      train_sum += router_batch(res.model, &res.model, ens, train,
                                std::span<const std::size_t>(order.data() + start, count), cfg, p_tf, window,
                                train_tag(epoch))
                       .loss_sum;
      nn::clip_global_norm(params, cfg.clip_norm);
      res.optimizer.update(params);
    }
    EpochLog log;
    log.epoch = epoch;
    log.p_tf = p_tf;
    log.w_bptt = window;
    log.train_loss = train_sum / (static_cast<double>(train.size()) * cfg.horizon);
    // Validation rolls out on the router's own choices, as at deployment.
    log.val_loss = val.empty() ? log.train_loss : router_loss(res.model, ens, val, cfg, 0.0, val_tag(epoch));
    res.log.push_back(log);
    if (log.val_loss < res.best_val) {
      res.best_val = log.val_loss;
      res.best_epoch = epoch;
      best = snapshot(params);
    }
  }
  restore(best, params);
  return res;
}

InstanceMetrics instance_metrics(const RouteTrace& trace) {
  InstanceMetrics m;
  m.final_error = final_error(trace);
  m.auc = error_auc(trace, false);
  m.auc_squared = error_auc(trace, true);
  const ResidualMetrics rm = residual_metrics(trace);
  m.final_residual = rm.final_residual;
  m.residual_auc = rm.auc;
  m.error_increases = error_increases(trace);
  return m;
}

EvalSummary summarize(std::vector<InstanceMetrics> instances) {
  EvalSummary s;
  s.instances = std::move(instances);
  auto column = [&](double InstanceMetrics::*field) {
    std::vector<double> v;
    for (const InstanceMetrics& m : s.instances) v.push_back(m.*field);
    return mean_se(v);
  };
  s.final_error = column(&InstanceMetrics::final_error);
  s.auc = column(&InstanceMetrics::auc);
  s.auc_squared = column(&InstanceMetrics::auc_squared);
  s.final_residual = column(&InstanceMetrics::final_residual);
  s.residual_auc = column(&InstanceMetrics::residual_auc);
  return s;
}

EvalSummary evaluate(const Ensemble& ens, const Policy& policy, const Dataset& test, int T) {
  require_same_grid(ens.op.grid, test.grid, "evaluate");
  std::vector<InstanceMetrics> out;
  out.reserve(test.size());
  for (const Sample& s : test.samples) {
    RunOptions opts;
    opts.u_ref = &s.u;
    out.push_back(instance_metrics(run_hybrid(ens, policy, s.f, T, opts)));
  }
  return summarize(std::move(out));
}

}  // namespace grpde
