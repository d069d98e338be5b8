#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace grpde {

/// Uniform periodic grid on [0,1)^dim with `n` points per axis and spacing 1/n.
/// The endpoint x = 1 is identified with x = 0 and is not stored.
struct GridSpec {
  int dim = 1;
  int n = 4;

  double h() const noexcept { return 1.0 / static_cast<double>(n); }
  std::size_t size() const noexcept {
    return dim == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Throws GridTooSmall unless dim is 1 or 2 and n >= min_n.
void validate_grid(const GridSpec& grid, int min_n = 4);

/// Real grid function. 2D values are row-major: index = i0 * n + i1.
class Field {
 public:
  Field() = default;
  explicit Field(GridSpec grid);
  Field(GridSpec grid, std::vector<double> values);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& data() noexcept { return values_; }
  const std::vector<double>& data() const noexcept { return values_; }

  double norm() const;
  double squared_norm() const;
  double mean() const;
  double rms() const;
  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);

  /// this += s * other
  Field& axpy(double s, const Field& other);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
};

/// Throws GridMismatch when the two grids differ.
void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

double dot(const Field& a, const Field& b);

/// v - mean(v).
Field project_zero_mean(const Field& v);

/// Grid coordinates (cell-left points i*h), one row per axis: coords[axis][point].
std::vector<std::vector<double>> grid_coordinates(const GridSpec& grid);

}  // namespace grpde
