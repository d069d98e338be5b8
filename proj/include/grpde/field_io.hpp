#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "grpde/grid.hpp"

namespace grpde {

// Binary field format: 16-byte header then little-endian float64 values.
//   magic "GRPD" | version u16 | dim u16 | n u32 | reserved u32
inline constexpr std::uint16_t kFieldFormatVersion = 1;

void write_field(std::ostream& out, const Field& v);
Field read_field(std::istream& in);
void save_field(const Field& v, const std::filesystem::path& path);
Field load_field(const std::filesystem::path& path);

namespace bytes {

// Little-endian append/read helpers shared by the binary formats.
void put_u16(std::vector<std::uint8_t>& buf, std::uint16_t v);
void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& buf, std::uint64_t v);
void put_f64(std::vector<std::uint8_t>& buf, double v);
void put_f64s(std::vector<std::uint8_t>& buf, std::span<const double> v);
void put_string(std::vector<std::uint8_t>& buf, const std::string& s);

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);
  std::string string();
  void expect_magic(const char* magic);

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }

 private:
  void need(std::size_t count);

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc32(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);

}  // namespace bytes

}  // namespace grpde
