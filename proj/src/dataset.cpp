#include "grpde/dataset.hpp"

#include "grpde/error.hpp"
#include "grpde/field_io.hpp"
#include "grpde/spectral.hpp"

namespace grpde {

std::string equation_name(Equation eq) { return eq == Equation::Poisson ? "poisson" : "helmholtz"; }

Equation parse_equation(const std::string& name) {
  if (name == "poisson") return Equation::Poisson;
  if (name == "helmholtz") return Equation::Helmholtz;
  throw Error(Errc::InvalidArgument, "unknown equation '" + name + "' (expected poisson or helmholtz)");
}

DiscreteOperator make_operator(const GridSpec& grid, Equation eq, double shift) {
  return eq == Equation::Poisson ? build_operator(grid, OperatorKind::Poisson)
                                 : build_operator(grid, OperatorKind::Helmholtz, shift);
}

Dataset generate_dataset(GrfSpec spec, std::size_t count, Equation eq, double shift) {
  if (eq == Equation::Poisson) spec.zero_dc = true;
  const DiscreteOperator op = make_operator(spec.grid, eq, shift);
  Dataset ds;
  ds.equation = eq;
  ds.grid = spec.grid;
  ds.shift = eq == Equation::Poisson ? 0.0 : shift;
  ds.seed = spec.seed;
  ds.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(spec.seed, i);
    Field f = sample_grf(spec, rng);
    Field u = reference_solution(op, f);
    ds.samples.push_back({std::move(f), std::move(u)});
  }
  return ds;
}

Dataset subset(const Dataset& ds, std::size_t begin, std::size_t count) {
  if (begin + count > ds.size()) {
    throw Error(Errc::InvalidArgument, "subset [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                           ") exceeds dataset of " + std::to_string(ds.size()));
  }
  Dataset out = ds;
  out.samples.assign(ds.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     ds.samples.begin() + static_cast<std::ptrdiff_t>(begin + count));
  return out;
}

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  std::vector<std::uint8_t> buf{'G', 'R', 'D', 'S'};
  bytes::put_u16(buf, kDatasetVersion);
  bytes::put_u16(buf, static_cast<std::uint16_t>(ds.equation));
  bytes::put_u16(buf, static_cast<std::uint16_t>(ds.grid.dim));
  bytes::put_u16(buf, 0);
  bytes::put_u32(buf, static_cast<std::uint32_t>(ds.grid.n));
  bytes::put_u32(buf, static_cast<std::uint32_t>(ds.size()));
  bytes::put_u64(buf, ds.seed);
  bytes::put_f64(buf, ds.shift);
  for (const Sample& s : ds.samples) {
    if (s.f.grid() != ds.grid || s.u.grid() != ds.grid) {
      throw Error(Errc::GridMismatch, "dataset sample does not live on the dataset grid");
    }
    bytes::put_f64s(buf, s.f.values());
    bytes::put_f64s(buf, s.u.values());
  }
  bytes::put_u32(buf, bytes::crc32(buf));
  return buf;
}

Dataset decode_dataset(std::span<const std::uint8_t> data) {
  bytes::Reader r(data);
  r.expect_magic("GRDS");
  const auto version = r.u16();
  if (version != kDatasetVersion) {
    throw Error(Errc::FormatVersionMismatch, "dataset version " + std::to_string(version) + " unsupported");
  }
  Dataset ds;
  const auto eq = r.u16();
  if (eq != 1 && eq != 2) throw Error(Errc::IoError, "unknown equation tag " + std::to_string(eq));
  ds.equation = static_cast<Equation>(eq);
  ds.grid.dim = r.u16();
  r.u16();
  ds.grid.n = static_cast<int>(r.u32());
  validate_grid(ds.grid, 2);
  const std::uint32_t count = r.u32();
  ds.seed = r.u64();
  ds.shift = r.f64();
  const std::size_t payload = 2 * 8 * ds.grid.size() * count;
  if (r.remaining() != payload + 4) {
    throw Error(Errc::IoError, "dataset payload size mismatch: expected " + std::to_string(payload + 4) +
                                   " bytes, found " + std::to_string(r.remaining()));
  }
  const std::size_t body = data.size() - 4;
  bytes::Reader tail(data.subspan(body));
  if (tail.u32() != bytes::crc32(data.first(body))) {
    throw Error(Errc::ChecksumMismatch, "dataset checksum mismatch");
  }
  ds.samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Sample s{Field(ds.grid), Field(ds.grid)};
    r.f64s(s.f.values());
    r.f64s(s.u.values());
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  bytes::write_file(path, encode_dataset(ds));
}

Dataset load_dataset(const std::filesystem::path& path) { return decode_dataset(bytes::read_file(path)); }

}  // namespace grpde
