#include "grpde/nn/checkpoint.hpp"

#include "grpde/error.hpp"
#include "grpde/field_io.hpp"

namespace grpde::nn {

namespace {

const char* kind_name(ModelKind k) { return k == ModelKind::DeepOnet ? "DeepONet" : "LSTM router"; }

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(ModelKind kind, const std::string& architecture,
                                            const std::vector<const Tensor*>& params, const Adam* optimizer) {
  std::vector<std::uint8_t> buf{'G', 'R', 'C', 'K'};
  bytes::put_u16(buf, kCheckpointVersion);
  bytes::put_u16(buf, static_cast<std::uint16_t>(kind));
  bytes::put_string(buf, architecture);
  bytes::put_u32(buf, static_cast<std::uint32_t>(params.size()));
  for (const Tensor* t : params) {
    bytes::put_u32(buf, static_cast<std::uint32_t>(t->shape.size()));
    for (std::size_t d : t->shape) bytes::put_u64(buf, d);
  }
  for (const Tensor* t : params) bytes::put_f64s(buf, t->value);
  bytes::put_u32(buf, optimizer ? 1u : 0u);
  if (optimizer) {
    const AdamConfig& c = optimizer->config();
    bytes::put_u64(buf, optimizer->steps());
    for (double x : {c.lr, c.beta1, c.beta2, c.eps, c.weight_decay}) bytes::put_f64(buf, x);
    if (optimizer->first_moment().size() != params.size()) {
      throw Error(Errc::ShapeMismatch, "optimizer state does not match the parameter list");
    }
    for (const auto& m : optimizer->first_moment()) bytes::put_f64s(buf, m);
    for (const auto& v : optimizer->second_moment()) bytes::put_f64s(buf, v);
  }
  bytes::put_u32(buf, bytes::crc32(buf));
  return buf;
}

CheckpointRecord decode_checkpoint(std::span<const std::uint8_t> data) {
  bytes::Reader r(data);
  r.expect_magic("GRCK");
  const auto version = r.u16();
  if (version != kCheckpointVersion) {
    throw Error(Errc::FormatVersionMismatch, "checkpoint version " + std::to_string(version) + " unsupported");
  }
  if (data.size() < 12) throw Error(Errc::IoError, "truncated checkpoint");
  const std::size_t body = data.size() - 4;
  bytes::Reader tail(data.subspan(body));
  if (tail.u32() != bytes::crc32(data.first(body))) {
    throw Error(Errc::ChecksumMismatch, "checkpoint checksum mismatch (corrupt or truncated file)");
  }

  CheckpointRecord rec;
  const auto kind = r.u16();
  if (kind != 1 && kind != 2) throw Error(Errc::IoError, "unknown model kind " + std::to_string(kind));
  rec.kind = static_cast<ModelKind>(kind);
  rec.architecture = r.string();
  const std::uint32_t count = r.u32();
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = r.u64();
    Tensor t(shape);
    t.grad.clear();
    rec.params.push_back(std::move(t));
  }
  for (Tensor& t : rec.params) r.f64s(t.value);
  if (r.u32() == 1) {
    OptimizerRecord opt;
    opt.step = r.u64();
    opt.config.lr = r.f64();
    opt.config.beta1 = r.f64();
    opt.config.beta2 = r.f64();
    opt.config.eps = r.f64();
    opt.config.weight_decay = r.f64();
    for (const Tensor& t : rec.params) {
      opt.m.emplace_back(t.size());
      r.f64s(opt.m.back());
    }
    for (const Tensor& t : rec.params) {
      opt.v.emplace_back(t.size());
      r.f64s(opt.v.back());
    }
    rec.optimizer = std::move(opt);
  }
  if (r.offset() != body) throw Error(Errc::IoError, "unexpected trailing bytes in checkpoint");
  return rec;
}

CheckpointRecord load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::MissingCheckpoint, "checkpoint " + path.string() + " does not exist");
  }
  const auto data = bytes::read_file(path);
  return decode_checkpoint(data);
}

void assign_parameters(const std::vector<Tensor>& src, const ParamList& dst) {
  if (src.size() != dst.size()) {
    throw Error(Errc::ShapeMismatch, "checkpoint holds " + std::to_string(src.size()) + " tensors, model has " +
                                         std::to_string(dst.size()));
  }
  for (std::size_t k = 0; k < src.size(); ++k) {
    if (src[k].shape != dst[k]->shape) throw Error(Errc::ShapeMismatch, "tensor " + std::to_string(k) + " shape differs");
    dst[k]->value = src[k].value;
    dst[k]->zero_grad();
  }
}

namespace {

template <class Model>
Model restore_model(const std::filesystem::path& path, ModelKind expected, Adam* optimizer,
                    Model (*build)(const std::string&)) {
  CheckpointRecord rec = load_checkpoint(path);
  if (rec.kind != expected) {
    throw Error(Errc::KindMismatch, path.string() + " holds a " + kind_name(rec.kind) + ", expected a " +
                                        kind_name(expected));
  }
  Model model = build(rec.architecture);
  const ParamList params = model.parameters();
  assign_parameters(rec.params, params);
  if (optimizer) {
    if (rec.optimizer) {
      *optimizer = Adam(rec.optimizer->config, params);
      optimizer->restore(rec.optimizer->step, std::move(rec.optimizer->m), std::move(rec.optimizer->v));
    } else {
      *optimizer = Adam(optimizer->config(), params);
    }
  }
  return model;
}

}  // namespace

void save_deeponet(const DeepOnet& model, const Adam* optimizer, const std::filesystem::path& path) {
  bytes::write_file(path, encode_checkpoint(ModelKind::DeepOnet, model.architecture_json(), model.parameters(),
                                            optimizer));
}

DeepOnet load_deeponet(const std::filesystem::path& path, Adam* optimizer) {
  return restore_model<DeepOnet>(path, ModelKind::DeepOnet, optimizer, &DeepOnet::from_architecture_json);
}

void save_router(const LstmRouter& model, const Adam* optimizer, const std::filesystem::path& path) {
  bytes::write_file(path, encode_checkpoint(ModelKind::LstmRouter, model.architecture_json(), model.parameters(),
                                            optimizer));
}

LstmRouter load_router(const std::filesystem::path& path, Adam* optimizer) {
  return restore_model<LstmRouter>(path, ModelKind::LstmRouter, optimizer, &LstmRouter::from_architecture_json);
}

}  // namespace grpde::nn
