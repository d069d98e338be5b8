#include "grpde/nn/lstm_router.hpp"

#include <cmath>

#include "grpde/error.hpp"
#include "json.hpp"

namespace grpde::nn {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

void glorot(Tensor& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (double& v : w.value) v = (2.0 * rng.uniform() - 1.0) * limit;
}

Eigen::Map<const Eigen::VectorXd> vec(const Tensor& t) {
  return {t.value.data(), static_cast<Eigen::Index>(t.size())};
}

Eigen::Map<Eigen::VectorXd> grad_vec(Tensor& t) { return {t.grad.data(), static_cast<Eigen::Index>(t.size())}; }

}  // namespace

LstmRouter::LstmRouter(LstmRouterSpec spec) : spec_(spec) {
  if (spec_.input == 0 || spec_.encoder == 0 || spec_.hidden == 0 || spec_.layers == 0 || spec_.outputs == 0) {
    throw Error(Errc::InvalidArgument, "LSTM router dimensions must be positive");
  }
  const std::size_t h = spec_.hidden;
  enc_w_ = Tensor({spec_.encoder, spec_.input});
  enc_b_ = Tensor({spec_.encoder});
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    const std::size_t in = l == 0 ? spec_.encoder : h;
    wx_.emplace_back(std::vector<std::size_t>{4 * h, in});
    wh_.emplace_back(std::vector<std::size_t>{4 * h, h});
    b_.emplace_back(std::vector<std::size_t>{4 * h});
  }
  head_w_ = Tensor({spec_.outputs, h});
  head_b_ = Tensor({spec_.outputs});
}

void LstmRouter::init(Rng& rng) {
  glorot(enc_w_, rng);
  std::fill(enc_b_.value.begin(), enc_b_.value.end(), 0.0);
  const std::size_t h = spec_.hidden;
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    glorot(wx_[l], rng);
    glorot(wh_[l], rng);
    std::fill(b_[l].value.begin(), b_[l].value.end(), 0.0);
    for (std::size_t k = h; k < 2 * h; ++k) b_[l].value[k] = 1.0;
  }
  glorot(head_w_, rng);
  std::fill(head_b_.value.begin(), head_b_.value.end(), 0.0);
}

LstmState LstmRouter::initial_state(std::size_t batch) const {
  LstmState s;
  const auto rows = static_cast<Eigen::Index>(spec_.hidden);
  const auto cols = static_cast<Eigen::Index>(batch);
  s.h.assign(spec_.layers, Eigen::MatrixXd::Zero(rows, cols));
  s.c.assign(spec_.layers, Eigen::MatrixXd::Zero(rows, cols));
  return s;
}

Eigen::MatrixXd LstmRouter::step(const Eigen::MatrixXd& x, LstmState& state, LstmStepCache* cache) const {
  if (static_cast<std::size_t>(x.rows()) != spec_.input) {
    throw Error(Errc::ShapeMismatch, "router input has " + std::to_string(x.rows()) + " features, expected " +
                                         std::to_string(spec_.input));
  }
  if (state.h.size() != spec_.layers || state.c.size() != spec_.layers) {
    throw Error(Errc::ShapeMismatch, "router state has the wrong layer count");
  }
  const Eigen::Index hdim = static_cast<Eigen::Index>(spec_.hidden);
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    if (state.h[l].rows() != hdim || state.c[l].rows() != hdim || state.h[l].cols() != x.cols() ||
        state.c[l].cols() != x.cols()) {
      throw Error(Errc::ShapeMismatch, "router state shape does not match the batch");
    }
  }

  Eigen::MatrixXd pre = enc_w_.matrix() * x;
  pre.colwise() += vec(enc_b_);
  Eigen::MatrixXd a = pre.array().tanh().matrix();
  if (cache) {
    cache->x = x;
    cache->enc = a;
    cache->layers.assign(spec_.layers, {});
  }
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    Eigen::MatrixXd z = wx_[l].matrix() * a + wh_[l].matrix() * state.h[l];
    z.colwise() += vec(b_[l]);
    Eigen::MatrixXd i = sigmoid(z.topRows(hdim));
    Eigen::MatrixXd f = sigmoid(z.middleRows(hdim, hdim));
    Eigen::MatrixXd g = z.middleRows(2 * hdim, hdim).array().tanh().matrix();
    Eigen::MatrixXd o = sigmoid(z.bottomRows(hdim));
    Eigen::MatrixXd c = f.cwiseProduct(state.c[l]) + i.cwiseProduct(g);
    Eigen::MatrixXd h = o.cwiseProduct(c.array().tanh().matrix());
    if (cache) {
      LstmLayerCache& lc = cache->layers[l];
      lc.input = a;
      lc.h_prev = state.h[l];
      lc.c_prev = state.c[l];
      lc.i = i;
      lc.f = f;
      lc.g = g;
      lc.o = o;
      lc.c = c;
    }
    state.h[l] = h;
    state.c[l] = std::move(c);
    a = std::move(h);
  }
  Eigen::MatrixXd logits = head_w_.matrix() * a;
  logits.colwise() += vec(head_b_);
  return logits;
}

void LstmRouter::backward_sequence(const std::vector<LstmStepCache>& steps,
                                   const std::vector<Eigen::MatrixXd>& d_logits, std::size_t window) {
  if (steps.size() != d_logits.size()) throw Error(Errc::LengthMismatch, "one logit gradient per step required");
  if (window == 0) throw Error(Errc::InvalidArgument, "BPTT window must be at least 1");
  if (steps.empty()) return;
  const Eigen::Index hdim = static_cast<Eigen::Index>(spec_.hidden);
  const Eigen::Index batch = steps.front().x.cols();
  std::vector<Eigen::MatrixXd> dh_next(spec_.layers, Eigen::MatrixXd::Zero(hdim, batch));
  std::vector<Eigen::MatrixXd> dc_next(spec_.layers, Eigen::MatrixXd::Zero(hdim, batch));
  Eigen::MatrixXd dz(4 * hdim, batch);

  for (std::size_t t = steps.size(); t-- > 0;) {
    const LstmStepCache& sc = steps[t];
    const Eigen::MatrixXd& dl = d_logits[t];
    const LstmLayerCache& top = sc.layers.back();
    const Eigen::MatrixXd h_top = top.o.cwiseProduct(top.c.array().tanh().matrix());
    head_w_.grad_matrix().noalias() += dl * h_top.transpose();
    grad_vec(head_b_) += dl.rowwise().sum();
    Eigen::MatrixXd d_above = head_w_.matrix().transpose() * dl;

    for (std::size_t l = spec_.layers; l-- > 0;) {
      const LstmLayerCache& lc = sc.layers[l];
      const Eigen::MatrixXd dh = d_above + dh_next[l];
      const Eigen::ArrayXXd tc = lc.c.array().tanh();
      const Eigen::ArrayXXd dc = dc_next[l].array() + dh.array() * lc.o.array() * (1.0 - tc * tc);
      const Eigen::ArrayXXd i = lc.i.array(), f = lc.f.array(), g = lc.g.array(), o = lc.o.array();
      dz.topRows(hdim) = (dc * g * i * (1.0 - i)).matrix();
      dz.middleRows(hdim, hdim) = (dc * lc.c_prev.array() * f * (1.0 - f)).matrix();
      dz.middleRows(2 * hdim, hdim) = (dc * i * (1.0 - g * g)).matrix();
      dz.bottomRows(hdim) = (dh.array() * tc * o * (1.0 - o)).matrix();

      wx_[l].grad_matrix().noalias() += dz * lc.input.transpose();
      wh_[l].grad_matrix().noalias() += dz * lc.h_prev.transpose();
      grad_vec(b_[l]) += dz.rowwise().sum();

      d_above = wx_[l].matrix().transpose() * dz;
      dh_next[l] = wh_[l].matrix().transpose() * dz;
      dc_next[l] = (dc * f).matrix();
    }

    const Eigen::MatrixXd d_pre = d_above.cwiseProduct((1.0 - sc.enc.array().square()).matrix());
    enc_w_.grad_matrix().noalias() += d_pre * sc.x.transpose();
    grad_vec(enc_b_) += d_pre.rowwise().sum();

    if (t % window == 0) {
      for (std::size_t l = 0; l < spec_.layers; ++l) {
        dh_next[l].setZero();
        dc_next[l].setZero();
      }
    }
  }
}

ParamList LstmRouter::parameters() {
  ParamList out{&enc_w_, &enc_b_};
  for (std::size_t l = 0; l < spec_.layers; ++l) {
    out.push_back(&wx_[l]);
    out.push_back(&wh_[l]);
    out.push_back(&b_[l]);
  }
  out.push_back(&head_w_);
  out.push_back(&head_b_);
  return out;
}

std::vector<const Tensor*> LstmRouter::parameters() const {
  std::vector<const Tensor*> out;
  for (Tensor* t : const_cast<LstmRouter*>(this)->parameters()) out.push_back(t);
  return out;
}

std::string LstmRouter::architecture_json() const {
  nlohmann::json j;
  j["model"] = "lstm_router";
  j["input"] = spec_.input;
  j["encoder"] = spec_.encoder;
  j["hidden"] = spec_.hidden;
  j["layers"] = spec_.layers;
  j["outputs"] = spec_.outputs;
  return j.dump();
}

LstmRouter LstmRouter::from_architecture_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    LstmRouterSpec spec;
    spec.input = j.at("input").get<std::size_t>();
    spec.encoder = j.at("encoder").get<std::size_t>();
    spec.hidden = j.at("hidden").get<std::size_t>();
    spec.layers = j.at("layers").get<std::size_t>();
    spec.outputs = j.at("outputs").get<std::size_t>();
    return LstmRouter(spec);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::IoError, std::string("bad router architecture record: ") + e.what());
  }
}

}  // namespace grpde::nn
