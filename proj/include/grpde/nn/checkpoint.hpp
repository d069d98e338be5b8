#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grpde/nn/adam.hpp"
#include "grpde/nn/deeponet.hpp"
#include "grpde/nn/lstm_router.hpp"

namespace grpde::nn {

// Checkpoint file layout (little-endian):
//   magic "GRCK" | version u16 | kind u16 | architecture JSON (u32 length + bytes)
//   | tensor count u32 | per tensor: rank u32, dims u64...
//   | parameter values f64... | optimizer flag u32
//   | [step u64, lr, beta1, beta2, eps, weight_decay f64, m values, v values]
//   | CRC32 u32 of everything before it
inline constexpr std::uint16_t kCheckpointVersion = 1;

enum class ModelKind : std::uint16_t { DeepOnet = 1, LstmRouter = 2 };

struct OptimizerRecord {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

struct CheckpointRecord {
  ModelKind kind = ModelKind::DeepOnet;
  std::string architecture;
  std::vector<Tensor> params;  // values only, gradients empty
  std::optional<OptimizerRecord> optimizer;
};

std::vector<std::uint8_t> encode_checkpoint(ModelKind kind, const std::string& architecture,
                                            const std::vector<const Tensor*>& params, const Adam* optimizer);
CheckpointRecord decode_checkpoint(std::span<const std::uint8_t> data);

CheckpointRecord load_checkpoint(const std::filesystem::path& path);

void save_deeponet(const DeepOnet& model, const Adam* optimizer, const std::filesystem::path& path);
DeepOnet load_deeponet(const std::filesystem::path& path, Adam* optimizer = nullptr);

void save_router(const LstmRouter& model, const Adam* optimizer, const std::filesystem::path& path);
LstmRouter load_router(const std::filesystem::path& path, Adam* optimizer = nullptr);

/// Copies parameter values into `dst`, checking shapes.
void assign_parameters(const std::vector<Tensor>& src, const ParamList& dst);

}  // namespace grpde::nn
