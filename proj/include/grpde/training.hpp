#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "grpde/dataset.hpp"
#include "grpde/metrics.hpp"
#include "grpde/nn/adam.hpp"
#include "grpde/nn/deeponet.hpp"
#include "grpde/nn/lstm_router.hpp"
#include "grpde/routing.hpp"

namespace grpde {

/// Scheduled-sampling and truncated-BPTT schedules. Epochs count from 1;
/// both schedules hold their start value for epochs <= warmup.
struct ScheduleConfig {
  double ss_start = 1.0;
  double gamma_tf = 0.95;
  double ss_end = 0.0;
  int warmup = 10;  // e_w
  int w_start = 30;
  double gamma_bptt = 1.25;
  int f_bptt = 4;
  int t_max = 300;
};

/// InvalidArgument unless 0 <= ss_end <= ss_start <= 1, 0 < γ_tf < 1,
/// γ_bptt > 1, w_start >= 1, f_bptt >= 1.
void validate_schedule(const ScheduleConfig& cfg);

/// ss_start for e <= e_w, else max(ss_start γ_tf^(e - e_w), ss_end).
double teacher_prob(const ScheduleConfig& cfg, int epoch);

/// w_start for e <= e_w, else min(T_max, floor(w_start γ_bptt^floor((e - e_w) / f_bptt))).
int bptt_window(const ScheduleConfig& cfg, int epoch);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double p_tf = 1.0;
  int w_bptt = 0;
};

/// CSV with columns epoch, train_loss, val_loss, p_tf, w_bptt.
void write_epoch_log(std::ostream& out, const std::vector<EpochLog>& log);

struct DeepOnetTrainConfig {
  nn::DeepOnetSpec arch;  // grid is taken from the dataset
  nn::AdamConfig adam;
  double clip_norm = 1.0;
  std::size_t batch = 128;
  int epochs = 100;
  std::uint64_t seed = 0;
};

struct DeepOnetTrainResult {
  nn::DeepOnet model;  // parameters of the best validation epoch
  nn::Adam optimizer;  // state at the end of training
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// Mean squared grid error between model output and u, divided by the
/// squared output scale of the model.
double deeponet_loss(const nn::DeepOnet& model, const Dataset& ds);

/// Regression f -> u. Scales are the rms of f and u over the training set.
/// EmptyDataset when `train` is empty; an empty `val` selects on training loss.
DeepOnetTrainResult train_deeponet(const Dataset& train, const Dataset& val, const DeepOnetTrainConfig& cfg);

struct TeacherRollout {
  std::vector<int> labels;                 // greedy choice at each step
  std::vector<std::vector<double>> costs;  // cost vector at each step
  std::vector<Field> iterates;             // u^(0)..u^(T)
};

/// Advances with the greedy label every step; u_ref computed spectrally when null.
TeacherRollout rollout_teacher_forced(const Ensemble& ens, const Field& f, int T, const Field* u_ref = nullptr);

struct RouterTrainConfig {
  nn::LstmRouterSpec arch;  // input and output widths are set from the ensemble
  nn::AdamConfig adam;
  double clip_norm = 1.0;
  std::size_t batch = 32;
  int epochs = 100;
  std::uint64_t seed = 0;
  ScheduleConfig schedule;
  int horizon = 300;
  /// Divide each step's cost vector by its sum, so every step's weights lie
  /// in [0, 1] whatever the error level or how badly one solver amplifies it.
  bool normalize_costs = true;
};

struct RouterTrainResult {
  nn::LstmRouter model;
  nn::Adam optimizer;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val = 0.0;
};

/// Cost-weighted cross-entropy training with scheduled sampling and TBPTT.
/// Loss is the mean of Ψ over steps and trajectories; one optimizer step
/// per batch of trajectories. Validation rolls out on the router's own
/// choices and the best validation epoch is restored.
RouterTrainResult train_router(const Ensemble& ens, const Dataset& train, const Dataset& val,
                               const RouterTrainConfig& cfg, const nn::LstmRouter* initial = nullptr);

/// Mean Ψ of a router over a dataset, same rollout rules as training.
double router_loss(const nn::LstmRouter& model, const Ensemble& ens, const Dataset& ds, const RouterTrainConfig& cfg,
                   double p_tf, std::uint64_t stream_tag);

struct InstanceMetrics {
  double final_error = 0.0;
  double auc = 0.0;
  double auc_squared = 0.0;
  double final_residual = 0.0;
  double residual_auc = 0.0;
  int error_increases = 0;
};

struct EvalSummary {
  std::vector<InstanceMetrics> instances;
  MeanSe final_error, auc, auc_squared, final_residual, residual_auc;
};

EvalSummary summarize(std::vector<InstanceMetrics> instances);
InstanceMetrics instance_metrics(const RouteTrace& trace);

/// Runs the policy on every test sample (reference solution from the dataset).
EvalSummary evaluate(const Ensemble& ens, const Policy& policy, const Dataset& test, int T);

}  // namespace grpde
