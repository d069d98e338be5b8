#include "grpde/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

#include <zlib.h>

#include "grpde/error.hpp"

namespace grpde {

namespace bytes {

void put_u16(std::vector<std::uint8_t>& buf, std::uint16_t v) {
  buf.push_back(static_cast<std::uint8_t>(v));
  buf.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& buf, double v) { put_u64(buf, std::bit_cast<std::uint64_t>(v)); }

void put_f64s(std::vector<std::uint8_t>& buf, std::span<const double> v) {
  buf.reserve(buf.size() + 8 * v.size());
  for (double x : v) put_f64(buf, x);
}

void put_string(std::vector<std::uint8_t>& buf, const std::string& s) {
  put_u32(buf, static_cast<std::uint32_t>(s.size()));
  buf.insert(buf.end(), s.begin(), s.end());
}

void Reader::need(std::size_t count) {
  if (remaining() < count) {
    throw Error(Errc::IoError, "truncated input: need " + std::to_string(count) + " bytes at offset " +
                                   std::to_string(pos_) + ", have " + std::to_string(remaining()));
  }
}

std::uint16_t Reader::u16() {
  need(2);
  const std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
  pos_ += 2;
  return v;
}

std::uint32_t Reader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t Reader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return v;
}

double Reader::f64() { return std::bit_cast<double>(u64()); }

void Reader::f64s(std::span<double> out) {
  need(8 * out.size());
  for (double& x : out) x = f64();
}

std::string Reader::string() {
  const std::uint32_t len = u32();
  need(len);
  std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
  pos_ += len;
  return s;
}

void Reader::expect_magic(const char* magic) {
  if (remaining() < 4 || std::memcmp(data_.data() + pos_, magic, 4) != 0) {
    throw Error(Errc::FormatVersionMismatch, std::string("missing magic \"") + magic + "\"");
  }
  pos_ += 4;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t offset = 0;
  while (offset < data.size()) {
    const std::size_t chunk = std::min<std::size_t>(data.size() - offset, 1u << 30);
    crc = ::crc32(crc, data.data() + offset, static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string() + " for reading");
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(Errc::IoError, "write to " + path.string() + " failed");
}

}  // namespace bytes

namespace {

std::vector<std::uint8_t> encode_field(const Field& v) {
  std::vector<std::uint8_t> buf{'G', 'R', 'P', 'D'};
  bytes::put_u16(buf, kFieldFormatVersion);
  bytes::put_u16(buf, static_cast<std::uint16_t>(v.grid().dim));
  bytes::put_u32(buf, static_cast<std::uint32_t>(v.grid().n));
  bytes::put_u32(buf, 0);
  bytes::put_f64s(buf, v.values());
  return buf;
}

Field decode_field(bytes::Reader& r) {
  r.expect_magic("GRPD");
  const auto version = r.u16();
  if (version != kFieldFormatVersion) {
    throw Error(Errc::FormatVersionMismatch, "field format version " + std::to_string(version) + " unsupported");
  }
  GridSpec grid;
  grid.dim = r.u16();
  grid.n = static_cast<int>(r.u32());
  r.u32();
  validate_grid(grid, 2);
  Field v(grid);
  r.f64s(v.values());
  return v;
}

}  // namespace

void write_field(std::ostream& out, const Field& v) {
  const auto buf = encode_field(v);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(Errc::IoError, "field write failed");
}

Field read_field(std::istream& in) {
  std::vector<std::uint8_t> header(16);
  in.read(reinterpret_cast<char*>(header.data()), 16);
  if (in.gcount() != 16) throw Error(Errc::IoError, "truncated field header");
  bytes::Reader hr(header);
  hr.expect_magic("GRPD");
  hr.u16();
  const int dim = hr.u16();
  const std::size_t n = hr.u32();
  const std::size_t count = dim == 1 ? n : n * n;
  header.resize(16 + 8 * count);
  in.read(reinterpret_cast<char*>(header.data() + 16), static_cast<std::streamsize>(8 * count));
  if (static_cast<std::size_t>(in.gcount()) != 8 * count) throw Error(Errc::IoError, "truncated field payload");
  bytes::Reader r(header);
  return decode_field(r);
}

void save_field(const Field& v, const std::filesystem::path& path) { bytes::write_file(path, encode_field(v)); }

Field load_field(const std::filesystem::path& path) {
  const auto data = bytes::read_file(path);
  bytes::Reader r(data);
  return decode_field(r);
}

}  // namespace grpde
