#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grpde/nn/tensor.hpp"
#include "grpde/rng.hpp"

namespace grpde::nn {

struct LstmRouterSpec {
  std::size_t input = 2;
  std::size_t encoder = 64;
  std::size_t hidden = 64;
  std::size_t layers = 3;
  std::size_t outputs = 2;  // K
};

/// Recurrent state, one hidden x batch matrix per layer.
struct LstmState {
  std::vector<Eigen::MatrixXd> h;
  std::vector<Eigen::MatrixXd> c;
};

struct LstmLayerCache {
  Eigen::MatrixXd input, h_prev, c_prev;
  Eigen::MatrixXd i, f, g, o, c;
};

struct LstmStepCache {
  Eigen::MatrixXd x;
  Eigen::MatrixXd enc;
  std::vector<LstmLayerCache> layers;
};

/// Dense tanh encoder, stacked LSTM cells (gate order i, f, g, o), linear head.
class LstmRouter {
 public:
  LstmRouter() = default;
  explicit LstmRouter(LstmRouterSpec spec);

  const LstmRouterSpec& spec() const noexcept { return spec_; }

  /// Glorot-uniform weights, zero biases except forget gates (1).
  void init(Rng& rng);

  LstmState initial_state(std::size_t batch) const;

  /// One time step for a batch (columns); advances `state` and returns K x batch logits.
  Eigen::MatrixXd step(const Eigen::MatrixXd& x, LstmState& state, LstmStepCache* cache = nullptr) const;

  /// Backpropagation through a recorded sequence. Gradients carried between
  /// steps are cut at every step index divisible by `window`, so each segment
  /// of `window` steps is differentiated on its own while the forward state
  /// still flows across segments.
  void backward_sequence(const std::vector<LstmStepCache>& steps, const std::vector<Eigen::MatrixXd>& d_logits,
                         std::size_t window);

  ParamList parameters();
  std::vector<const Tensor*> parameters() const;

  std::string architecture_json() const;
  static LstmRouter from_architecture_json(const std::string& text);

 private:
  LstmRouterSpec spec_;
  Tensor enc_w_, enc_b_;
  std::vector<Tensor> wx_, wh_, b_;
  Tensor head_w_, head_b_;
};

}  // namespace grpde::nn
