#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "grpde/dataset.hpp"
#include "grpde/error.hpp"
#include "grpde/field_io.hpp"
#include "grpde/grf.hpp"
#include "grpde/spectral.hpp"

using namespace grpde;

namespace {

constexpr int kSamples = 10000;

double expected_variance(double k2, double shift = 9.0, double power = 2.0) {
  return std::pow(4.0 * std::numbers::pi * std::numbers::pi * k2 + shift, -power);
}

std::filesystem::path temp_path(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "grpde_test_grf";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Errc error_code(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("mode variance formula") {
  GrfSpec spec;
  CHECK(grf_mode_variance(spec, 0.0) == doctest::Approx(1.0 / 81.0));
  CHECK(grf_mode_variance(spec, 1.0) == doctest::Approx(expected_variance(1.0)));
  spec.power = 1.0;
  spec.shift = 2.0;
  CHECK(grf_mode_variance(spec, 4.0) == doctest::Approx(1.0 / (16.0 * std::numbers::pi * std::numbers::pi + 2.0)));
}

TEST_CASE("invalid GRF parameters") {
  Rng rng(1);
  GrfSpec spec;
  spec.shift = 0.0;
  CHECK(error_code([&] { (void)sample_grf(spec, rng); }) == Errc::InvalidArgument);
  spec.shift = 9.0;
  spec.power = 0.5;
  CHECK(error_code([&] { (void)sample_grf(spec, rng); }) == Errc::InvalidArgument);
}

TEST_CASE("zero DC and Hermitian symmetry") {
  GrfSpec spec;
  spec.grid = GridSpec{1, 64};
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const Field f = sample_grf(spec, rng);
    CHECK(std::abs(f.mean()) < 1e-12);
    CHECK(f.all_finite());
    const auto modes = dft(f);
    const auto back = idft_complex(spec.grid, modes);
    double imag = 0.0;
    for (const Complex& z : back) imag = std::max(imag, std::abs(z.imag()));
    CHECK(imag < 1e-12);
  }
  spec.grid = GridSpec{2, 16};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(sample_grf(spec, rng).mean()) < 1e-12);
}

TEST_CASE("Monte Carlo mode variances (1D)") {
  GrfSpec spec;
  spec.grid = GridSpec{1, 16};
  spec.zero_dc = false;
  Rng rng(3);
  double e1 = 0.0, e3 = 0.0, e8 = 0.0, e0 = 0.0;
  double re1re2 = 0.0, re1im1 = 0.0, re1sq = 0.0, re2sq = 0.0, im1sq = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const auto c = dft(sample_grf(spec, rng));
    e0 += std::norm(c[0]);
    e1 += std::norm(c[1]);
    e3 += std::norm(c[3]);
    e8 += std::norm(c[8]);
    re1re2 += c[1].real() * c[2].real();
    re1im1 += c[1].real() * c[1].imag();
    re1sq += c[1].real() * c[1].real();
    re2sq += c[2].real() * c[2].real();
    im1sq += c[1].imag() * c[1].imag();
  }
  CHECK(e1 / kSamples == doctest::Approx(expected_variance(1.0)).epsilon(0.05));
  CHECK(e3 / kSamples == doctest::Approx(expected_variance(9.0)).epsilon(0.05));
  CHECK(e8 / kSamples == doctest::Approx(expected_variance(64.0)).epsilon(0.05));
  CHECK(e0 / kSamples == doctest::Approx(expected_variance(0.0)).epsilon(0.05));
  // Real and imaginary parts share the variance equally.
  CHECK(re1sq / kSamples == doctest::Approx(expected_variance(1.0) / 2).epsilon(0.05));
  CHECK(im1sq / kSamples == doctest::Approx(expected_variance(1.0) / 2).epsilon(0.05));
  // Distinct coefficients are uncorrelated.
  CHECK(std::abs(re1re2 / std::sqrt(re1sq * re2sq)) < 0.05);
  CHECK(std::abs(re1im1 / std::sqrt(re1sq * im1sq)) < 0.05);
}

TEST_CASE("Monte Carlo mode variance (2D)") {
  GrfSpec spec;
  spec.grid = GridSpec{2, 8};
  Rng rng(4);
  double e11 = 0.0, e10 = 0.0;
  for (int s = 0; s < kSamples; ++s) {
    const auto c = dft(sample_grf(spec, rng));
    e11 += std::norm(c[1 * 8 + 1]);
    e10 += std::norm(c[1 * 8 + 0]);
  }
  CHECK(e11 / kSamples == doctest::Approx(expected_variance(2.0)).epsilon(0.05));
  CHECK(e10 / kSamples == doctest::Approx(expected_variance(1.0)).epsilon(0.05));
}

TEST_CASE("stationary covariance") {
  GrfSpec spec;
  spec.grid = GridSpec{1, 16};
  Rng rng(5);
  std::vector<double> lag1(16, 0.0);
  for (int s = 0; s < kSamples; ++s) {
    const Field f = sample_grf(spec, rng);
    for (std::size_t i = 0; i < 16; ++i) lag1[i] += f[i] * f[(i + 1) % 16];
  }
  // Cov(x_i, x_{i+1}) = (1/N) Σ_k var_k cos(2πk/n), DC excluded.
  double theory = 0.0;
  for (int k = 1; k < 16; ++k) {
    const int kf = k <= 8 ? k : k - 16;
    theory += expected_variance(static_cast<double>(kf * kf)) * std::cos(2.0 * std::numbers::pi * k / 16) / 16.0;
  }
  for (double c : lag1) CHECK(c / kSamples == doctest::Approx(theory).epsilon(0.10));
}

TEST_CASE("dataset generation") {
  GrfSpec spec;
  spec.grid = GridSpec{1, 32};
  spec.seed = 99;
  CHECK(generate_dataset(spec, 0, Equation::Poisson).empty());

  const Dataset a = generate_dataset(spec, 12, Equation::Poisson);
  const Dataset b = generate_dataset(spec, 12, Equation::Poisson);
  CHECK(encode_dataset(a) == encode_dataset(b));
  const Dataset prefix = generate_dataset(spec, 5, Equation::Poisson);
  CHECK(encode_dataset(prefix) == encode_dataset(subset(a, 0, 5)));
  spec.seed = 100;
  CHECK(encode_dataset(generate_dataset(spec, 12, Equation::Poisson)) != encode_dataset(a));

  const DiscreteOperator pois = make_operator(spec.grid, Equation::Poisson, 0.0);
  for (const Sample& s : a.samples) {
    CHECK(std::abs(s.f.mean()) < 1e-12);
    CHECK(residual(pois, s.u, s.f).norm() < 1e-8 * s.f.norm());
  }

  spec.zero_dc = true;  // ignored for Helmholtz datasets
  const Dataset h = generate_dataset(spec, 8, Equation::Helmholtz, 1.0);
  const DiscreteOperator helm = make_operator(spec.grid, Equation::Helmholtz, 1.0);
  CHECK(h.shift == 1.0);
  for (const Sample& s : h.samples) CHECK(residual(helm, s.u, s.f).norm() < 1e-8 * s.f.norm());

  spec.grid = GridSpec{2, 8};
  const Dataset two = generate_dataset(spec, 3, Equation::Poisson);
  const DiscreteOperator p2 = make_operator(spec.grid, Equation::Poisson, 0.0);
  for (const Sample& s : two.samples) CHECK(residual(p2, s.u, s.f).norm() < 1e-8 * s.f.norm());
}

TEST_CASE("equation names") {
  CHECK(parse_equation("poisson") == Equation::Poisson);
  CHECK(parse_equation("helmholtz") == Equation::Helmholtz);
  CHECK(equation_name(Equation::Helmholtz) == "helmholtz");
  CHECK_THROWS_AS(parse_equation("wave"), Error);
}

TEST_CASE("dataset file round trip and corruption") {
  GrfSpec spec;
  spec.grid = GridSpec{1, 16};
  spec.seed = 5;
  const Dataset ds = generate_dataset(spec, 3, Equation::Helmholtz, 1.0);
  const auto path = temp_path("three.grds");
  save_dataset(ds, path);
  const Dataset back = load_dataset(path);
  REQUIRE(back.size() == 3);
  CHECK(back.equation == Equation::Helmholtz);
  CHECK(back.grid == ds.grid);
  CHECK(back.seed == 5);
  CHECK(back.shift == 1.0);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.samples[i].f.data() == ds.samples[i].f.data());
    CHECK(back.samples[i].u.data() == ds.samples[i].u.data());
  }
  const auto path2 = temp_path("three_again.grds");
  save_dataset(back, path2);
  CHECK(bytes::read_file(path) == bytes::read_file(path2));

  const auto raw = encode_dataset(ds);
  CHECK(std::string(raw.begin(), raw.begin() + 4) == "GRDS");
  CHECK(raw.size() == 4 + 2 * 4 + 4 + 4 + 8 + 8 + 3 * 2 * 16 * 8 + 4);

  auto truncated = raw;
  truncated.resize(raw.size() - 9);
  const Errc tc = error_code([&] { (void)decode_dataset(truncated); });
  CHECK((tc == Errc::IoError || tc == Errc::FormatVersionMismatch || tc == Errc::ChecksumMismatch));

  auto flipped = raw;
  flipped[40] ^= 0x10;
  CHECK(error_code([&] { (void)decode_dataset(flipped); }) == Errc::ChecksumMismatch);

  auto magic = raw;
  magic[0] = 'X';
  CHECK(error_code([&] { (void)decode_dataset(magic); }) == Errc::FormatVersionMismatch);

  auto version = raw;
  version[4] = 9;
  CHECK(error_code([&] { (void)decode_dataset(version); }) == Errc::FormatVersionMismatch);

  CHECK(error_code([&] { (void)load_dataset(temp_path("missing.grds")); }) == Errc::IoError);
}

TEST_CASE("subset bounds") {
  GrfSpec spec;
  spec.grid = GridSpec{1, 8};
  const Dataset ds = generate_dataset(spec, 4, Equation::Poisson);
  CHECK(subset(ds, 1, 2).size() == 2);
  CHECK(subset(ds, 1, 2).samples[0].f.data() == ds.samples[1].f.data());
  CHECK_THROWS_AS(subset(ds, 3, 2), Error);
}
