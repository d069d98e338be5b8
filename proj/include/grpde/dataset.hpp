#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "grpde/grf.hpp"
#include "grpde/operator.hpp"

namespace grpde {

enum class Equation : std::uint16_t { Poisson = 1, Helmholtz = 2 };

std::string equation_name(Equation eq);
Equation parse_equation(const std::string& name);

/// The discrete operator for an equation kind (a² ignored for Poisson).
DiscreteOperator make_operator(const GridSpec& grid, Equation eq, double shift);

struct Sample {
  Field f;
  Field u;
};

struct Dataset {
  Equation equation = Equation::Poisson;
  GridSpec grid{1, 64};
  double shift = 0.0;  // a², Helmholtz only
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
};

/// Draws `count` right-hand sides and solves for each exactly. Sample i uses
/// the random stream (spec.seed, i), so any prefix of a larger dataset equals
/// the smaller dataset. Poisson forces a zero DC mode.
Dataset generate_dataset(GrfSpec spec, std::size_t count, Equation eq, double shift = 0.0);

/// Samples [begin, begin + count) as a new dataset.
Dataset subset(const Dataset& ds, std::size_t begin, std::size_t count);

// File layout (little-endian):
//   magic "GRDS" | version u16 | equation u16 | dim u16 | reserved u16 | n u32
//   | count u32 | seed u64 | a² f64 | count x (f values, u values) f64 | CRC32 u32
inline constexpr std::uint16_t kDatasetVersion = 1;

std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::span<const std::uint8_t> data);
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace grpde
