#include "grpde/nn/deeponet.hpp"

#include <cmath>

#include "grpde/error.hpp"
#include "json.hpp"

namespace grpde::nn {

DeepOnet::DeepOnet(DeepOnetSpec spec) : spec_(std::move(spec)) {
  validate_grid(spec_.grid, 2);
  if (spec_.width == 0) throw Error(Errc::InvalidArgument, "DeepONet width must be positive");
  branch_ = Mlp(MlpSpec{spec_.grid.size(), spec_.branch_hidden, spec_.width, spec_.activation, !spec_.bias_free});
  trunk_ = Mlp(MlpSpec{static_cast<std::size_t>(spec_.grid.dim), spec_.trunk_hidden, spec_.width,
                       spec_.activation, true});
  const auto coords = grid_coordinates(spec_.grid);
  coords_.resize(spec_.grid.dim, static_cast<Eigen::Index>(spec_.grid.size()));
  for (int a = 0; a < spec_.grid.dim; ++a) {
    for (std::size_t p = 0; p < spec_.grid.size(); ++p) coords_(a, static_cast<Eigen::Index>(p)) = coords[a][p];
  }
}

void DeepOnet::init(Rng& rng) {
  branch_.init(rng);
  trunk_.init(rng);
}

void DeepOnet::set_scales(double input_scale, double output_scale) {
  if (!(input_scale > 0.0) || !(output_scale > 0.0) || !std::isfinite(input_scale) ||
      !std::isfinite(output_scale)) {
    throw Error(Errc::InvalidArgument, "DeepONet scales must be positive and finite");
  }
  input_scale_ = input_scale;
  output_scale_ = output_scale;
}

Eigen::MatrixXd DeepOnet::trunk_basis() const { return trunk_.forward(coords_); }

Eigen::MatrixXd DeepOnet::forward_batch(const Eigen::MatrixXd& f, DeepOnetCache* cache) const {
  if (static_cast<std::size_t>(f.rows()) != spec_.grid.size()) {
    throw Error(Errc::GridMismatch, "DeepONet input has " + std::to_string(f.rows()) + " points, model expects " +
                                        std::to_string(spec_.grid.size()));
  }
  if (!cache) return forward_with_basis(f, trunk_basis());
  cache->branch_out = branch_.forward(f / input_scale_, &cache->branch);
  cache->trunk_out = trunk_.forward(coords_, &cache->trunk);
  return output_scale_ * (cache->trunk_out.transpose() * cache->branch_out);
}

Eigen::MatrixXd DeepOnet::forward_with_basis(const Eigen::MatrixXd& f, const Eigen::MatrixXd& basis) const {
  if (static_cast<std::size_t>(f.rows()) != spec_.grid.size()) {
    throw Error(Errc::GridMismatch, "DeepONet input does not match the training grid");
  }
  const Eigen::MatrixXd b = branch_.forward(f / input_scale_);
  return output_scale_ * (basis.transpose() * b);
}

Field DeepOnet::forward(const Field& f) const {
  require_same_grid(spec_.grid, f.grid(), "deeponet_forward");
  const Eigen::Map<const Eigen::VectorXd> x(f.data().data(), static_cast<Eigen::Index>(f.size()));
  const Eigen::MatrixXd u = forward_batch(x);
  return Field(spec_.grid, std::vector<double>(u.data(), u.data() + u.size()));
}

void DeepOnet::backward(const DeepOnetCache& cache, const Eigen::MatrixXd& d_out) {
  const Eigen::MatrixXd d_core = output_scale_ * d_out;              // N x B
  const Eigen::MatrixXd d_branch = cache.trunk_out * d_core;           // p x B
  const Eigen::MatrixXd d_trunk = cache.branch_out * d_core.transpose();  // p x N
  branch_.backward(cache.branch, d_branch);
  trunk_.backward(cache.trunk, d_trunk);
}

ParamList DeepOnet::parameters() {
  ParamList out = branch_.parameters();
  for (Tensor* t : trunk_.parameters()) out.push_back(t);
  return out;
}

std::vector<const Tensor*> DeepOnet::parameters() const {
  auto out = branch_.parameters();
  for (const Tensor* t : trunk_.parameters()) out.push_back(t);
  return out;
}

std::string DeepOnet::architecture_json() const {
  nlohmann::json j;
  j["model"] = "deeponet";
  j["dim"] = spec_.grid.dim;
  j["n"] = spec_.grid.n;
  j["branch_hidden"] = spec_.branch_hidden;
  j["trunk_hidden"] = spec_.trunk_hidden;
  j["width"] = spec_.width;
  j["activation"] = activation_name(spec_.activation);
  j["bias_free"] = spec_.bias_free;
  j["input_scale"] = input_scale_;
  j["output_scale"] = output_scale_;
  return j.dump();
}

DeepOnet DeepOnet::from_architecture_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    DeepOnetSpec spec;
    spec.grid = GridSpec{j.at("dim").get<int>(), j.at("n").get<int>()};
    spec.branch_hidden = j.at("branch_hidden").get<std::vector<std::size_t>>();
    spec.trunk_hidden = j.at("trunk_hidden").get<std::vector<std::size_t>>();
    spec.width = j.at("width").get<std::size_t>();
    spec.activation = parse_activation(j.at("activation").get<std::string>());
    spec.bias_free = j.at("bias_free").get<bool>();
    DeepOnet model(spec);
    model.set_scales(j.at("input_scale").get<double>(), j.at("output_scale").get<double>());
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::IoError, std::string("bad DeepONet architecture record: ") + e.what());
  }
}

}  // namespace grpde::nn
