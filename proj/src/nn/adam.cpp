#include "grpde/nn/adam.hpp"

#include <cmath>

#include "grpde/error.hpp"

namespace grpde::nn {

Adam::Adam(AdamConfig cfg, std::span<Tensor* const> params) : cfg_(cfg) {
  for (const Tensor* t : params) {
    m_.emplace_back(t->size(), 0.0);
    v_.emplace_back(t->size(), 0.0);
  }
}

void Adam::update(std::span<Tensor* const> params) {
  if (params.size() != m_.size() || params.size() != v_.size()) {
    throw Error(Errc::ShapeMismatch, "optimizer state holds " + std::to_string(m_.size()) + " buffers for " +
                                         std::to_string(params.size()) + " parameters");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor& t = *params[k];
    if (m_[k].size() != t.size() || v_[k].size() != t.size() || t.grad.size() != t.size()) {
      throw Error(Errc::ShapeMismatch, "optimizer buffer shape does not match parameter " + std::to_string(k));
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double c1 = 1.0 - std::pow(cfg_.beta1, t);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t);
  const double decay = 1.0 - cfg_.lr * cfg_.weight_decay;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    std::vector<double>& m = m_[k];
    std::vector<double>& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      p.value[i] = p.value[i] * decay - cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

void Adam::restore(std::uint64_t step, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v) {
  if (m.size() != v.size()) throw Error(Errc::ShapeMismatch, "moment buffer counts differ");
  step_ = step;
  m_ = std::move(m);
  v_ = std::move(v);
}

double clip_global_norm(std::span<Tensor* const> params, double max_norm) {
  const double norm = grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Tensor* t : params) {
      for (double& g : t->grad) g *= scale;
    }
  }
  return norm;
}

}  // namespace grpde::nn
