#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "frist/image_io.hpp"
#include "frist/model_io.hpp"
#include "frist/patches.hpp"
#include "oracles.hpp"

using namespace frist;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "frist_test_patches_io";
  fs::create_directories(dir);
  return dir;
}

Image random_image(Rng& rng, int h, int w, double scale) {
  Image img(h, w);
  for (auto& p : img.pixels) p = scale * rng.uniform();
  return img;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out << bytes;
}

}  // namespace

TEST_CASE("anchor grid without wrap covers every pixel") {
  const auto a = anchor_grid(10, 7, 4, 3, false);
  // rows 0,3,6; cols 0,3 plus the appended last anchor 3 -> 0,3
  CHECK(a.size() == 6);
  CHECK(a.back().row == 6);
  CHECK(a.back().col == 3);
  const auto b = anchor_grid(10, 10, 4, 4, false);
  // 0,4 then 6 appended
  CHECK(b.size() == 9);
  CHECK(b.back().row == 6);
  CHECK(anchor_grid(8, 8, 8, 1, false).size() == 1);
}

TEST_CASE("wrap extraction yields one patch per stride position") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = oracle::uniform_int(rng, 4, 20), w = oracle::uniform_int(rng, 4, 20);
    const int side = oracle::uniform_int(rng, 1, std::min(h, w));
    const int stride = oracle::uniform_int(rng, 1, 3);
    const Image img = random_image(rng, h, w, 1.0);
    const auto ps = extract(img, side, stride, true);
    CHECK(ps.count() == static_cast<long>((h + stride - 1) / stride) * ((w + stride - 1) / stride));
    // spot check the wrapped indexing
    const long i = ps.count() - 1;
    const auto [r0, c0] = ps.positions[i];
    CHECK(ps.data(side * side - 1, i) == img.at((r0 + side - 1) % h, (c0 + side - 1) % w));
  }
}

TEST_CASE("extract then aggregate reproduces the image") {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = oracle::uniform_int(rng, 4, 24), w = oracle::uniform_int(rng, 4, 24);
    const int side = oracle::uniform_int(rng, 1, std::min({h, w, 8}));
    const int stride = oracle::uniform_int(rng, 1, side);
    const bool wrap = rng.below(2) == 1;
    const Image img = random_image(rng, h, w, 255.0);
    const auto agg = aggregate(extract(img, side, stride, wrap));
    CHECK(agg.uncovered() == 0);
    for (std::size_t p = 0; p < img.size(); ++p) CHECK(agg.image.pixels[p] == doctest::Approx(img.pixels[p]).epsilon(1e-12));
  }
  // full overlap: interior pixels are covered side^2 times
  const auto agg = aggregate(extract(Image(12, 12, 1.0), 4, 1, false));
  CHECK(agg.coverage[5 * 12 + 5] == 16);
  CHECK(agg.coverage[0] == 1);
}

TEST_CASE("extract rejects bad geometry") {
  const Image img(5, 5);
  CHECK_THROWS_AS(extract(img, 6, 1, false), ConfigError);
  CHECK_THROWS_AS(extract(img, 2, 0, false), ConfigError);
  CHECK_THROWS_AS(extract(img, 0, 1, false), ConfigError);
}

TEST_CASE("patch mean removal") {
  Matrix p(2, 2);
  p << 1, 4, 3, 8;
  const auto [centered, means] = subtract_patch_means(p);
  CHECK(means[0] == 2.0);
  CHECK(means[1] == 6.0);
  CHECK(centered.colwise().sum().norm() == 0.0);
}

TEST_CASE("PGM round trip, rounding and clipping") {
  const fs::path path = scratch_dir() / "a.pgm";
  Image img(3, 4);
  for (std::size_t p = 0; p < img.size(); ++p) img.pixels[p] = static_cast<double>(p * 20);
  write_pgm(path, img);
  CHECK(read_pgm(path) == img);
  CHECK(fs::file_size(path) == std::string("P5\n4 3\n255\n").size() + 12);

  Image odd(1, 3);
  odd.pixels = {-4.0, 12.6, 300.0};
  write_pgm(path, odd);
  CHECK(read_pgm(path).pixels == std::vector<double>{0.0, 13.0, 255.0});
  CHECK(read_image(path).pixels == std::vector<double>{0.0, 13.0, 255.0});
}

TEST_CASE("16-bit PGM is rescaled") {
  const fs::path path = scratch_dir() / "wide.pgm";
  std::string bytes = "P5\n2 1\n# comment\n65535\n";
  bytes += std::string("\xff\xff\x00\x00", 4);
  write_bytes(path, bytes);
  const Image img = read_pgm(path);
  CHECK(img.pixels[0] == doctest::Approx(255.0));
  CHECK(img.pixels[1] == 0.0);
}

TEST_CASE("malformed images raise I/O errors") {
  const fs::path dir = scratch_dir();
  write_bytes(dir / "bad1.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  CHECK_THROWS_AS(read_pgm(dir / "bad1.pgm"), IoError);
  write_bytes(dir / "bad2.pgm", "P5\n4 4\n255\nab");
  CHECK_THROWS_AS(read_pgm(dir / "bad2.pgm"), IoError);
  write_bytes(dir / "bad3.pgm", "P5\n-2 4\n255\n");
  CHECK_THROWS_AS(read_pgm(dir / "bad3.pgm"), IoError);
  write_bytes(dir / "bad.pfm", "PF\n2 2\n-1.0\n");
  CHECK_THROWS_AS(read_pfm(dir / "bad.pfm"), IoError);
  write_bytes(dir / "bad.cpx", "CPX0");
  CHECK_THROWS_AS(read_cpx(dir / "bad.cpx"), IoError);
  CHECK_THROWS_AS(read_pgm(dir / "missing.pgm"), IoError);
}

TEST_CASE("PFM and CPX round trips are exact") {
  const fs::path dir = scratch_dir();
  Rng rng(4);
  Image img(5, 3);
  // float-representable values survive the 32-bit format
  for (auto& p : img.pixels) p = static_cast<double>(static_cast<float>(rng.normal() * 100));
  write_pfm(dir / "a.pfm", img);
  CHECK(read_pfm(dir / "a.pfm") == img);
  CHECK(read_image(dir / "a.pfm") == img);

  ComplexImage c(4, 6);
  for (auto& p : c.pixels) p = Complex(rng.normal(), rng.normal());
  write_cpx(dir / "a.cpx", c);
  CHECK(read_cpx(dir / "a.cpx") == c);
  CHECK(fs::file_size(dir / "a.cpx") == 12 + 24 * 16);
}

TEST_CASE("mask round trip") {
  const fs::path path = scratch_dir() / "m.pgm";
  Mask m(3, 3);
  for (std::size_t p = 0; p < m.size(); ++p) m.pixels[p] = p % 2 ? 7 : 0;
  write_mask(path, m);
  const Mask back = read_mask(path);
  for (std::size_t p = 0; p < m.size(); ++p) CHECK((back.pixels[p] != 0) == (m.pixels[p] != 0));
}

TEST_CASE("model round trip") {
  Rng rng(5);
  FristModel m;
  m.patch_side = 3;
  m.num_angles = 12;
  m.sparsity = 4;
  m.lambda0 = 0.125;
  const auto all = enumerate_candidates(3, 12);
  m.operators = {all[0], all[5], all[17]};
  m.parent = oracle::gaussian_matrix(rng, 9, 9);
  std::stringstream buf;
  write_model(buf, m);
  CHECK(buf.str().size() == 5 + 4 * 4 + 8 + 4 + 3 * 5 + 81 * 8);
  const FristModel back = read_model(buf);
  CHECK(back.parent == m.parent);
  CHECK(back.sparsity == 4);
  CHECK(back.lambda0 == 0.125);
  CHECK(back.num_angles == 12);
  REQUIRE(back.operators.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(back.operators[k].perm == m.operators[k].perm);

  std::stringstream truncated(buf.str().substr(0, 40));
  CHECK_THROWS_AS(read_model(truncated), IoError);
  std::stringstream wrong("FRST2 and more bytes here");
  CHECK_THROWS_AS(read_model(wrong), IoError);

  const fs::path path = scratch_dir() / "m.frst";
  save_model(path, m);
  CHECK(load_model(path).parent == m.parent);
}

TEST_CASE("psnr, mse and clamping") {
  Image a(2, 2, 100.0), b(2, 2, 100.0);
  CHECK(std::isinf(psnr(a, b)));
  b.pixels[0] = 110.0;
  // mse = 100 / 4 = 25
  CHECK(mse(a, b) == 25.0);
  CHECK(psnr(a, b) == doctest::Approx(10 * std::log10(255.0 * 255.0 / 25.0)).epsilon(1e-14));
  CHECK(psnr(a, b, 1.0) == doctest::Approx(10 * std::log10(1.0 / 25.0)).epsilon(1e-14));
  CHECK_THROWS_AS(psnr(a, Image(3, 2)), ConfigError);
  CHECK(clamp_intensity(-3.0) == 0.0);
  CHECK(clamp_intensity(256.0) == 255.0);
  Image c(1, 2);
  c.pixels = {-1.0, 400.0};
  CHECK(clamp_intensity(c).pixels == std::vector<double>{0.0, 255.0});

  ComplexImage z(1, 2);
  z.pixels = {Complex(3, 4), Complex(0, -2)};
  CHECK(magnitude(z).pixels == std::vector<double>{5.0, 2.0});
  CHECK(to_complex(c).pixels[1] == Complex(400.0, 0.0));
}

TEST_CASE("synthetic generators are deterministic and in range") {
  for (const Image& img : {piecewise_stripes(40, 30), smooth_gradient(40, 30), directional_texture(40, 30, 3)}) {
    CHECK(img.height == 40);
    CHECK(img.width == 30);
    for (double p : img.pixels) CHECK((p >= 0.0 && p <= 255.0));
  }
  CHECK(directional_texture(32, 32, 3) == directional_texture(32, 32, 3));
  CHECK_FALSE(directional_texture(32, 32, 3) == directional_texture(32, 32, 4));
  const ComplexImage ph = mri_phantom(32, 32);
  CHECK(magnitude(ph).pixels[0] == doctest::Approx(0.0).scale(1.0));

  const Image noisy = add_gaussian_noise(Image(64, 64, 100.0), 10.0, 9);
  CHECK(noisy == add_gaussian_noise(Image(64, 64, 100.0), 10.0, 9));
  double sum = 0, sq = 0;
  for (double p : noisy.pixels) {
    sum += p - 100.0;
    sq += (p - 100.0) * (p - 100.0);
  }
  const double n = 64.0 * 64.0;
  CHECK(std::abs(sum / n) < 0.5);
  CHECK(std::sqrt(sq / n) == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("rng draws") {
  Rng a(77), b(77);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK((u >= 0.0 && u < 1.0));
  }
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 5000; ++i) ++counts[a.below(5)];
  for (int c : counts) CHECK(std::abs(c - 1000) < 150);
}
