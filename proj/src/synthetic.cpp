#include "frist/synthetic.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>

namespace frist {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw ConfigError("empty range");
  // rejection keeps the draw unbiased
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return v % bound;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  Image out = image;
  for (double& v : out.pixels) v += sigma * rng.normal();
  return out;
}

Image piecewise_stripes(int height, int width) {
  Image img(height, width);
  const double pi = std::numbers::pi;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double y = static_cast<double>(r) / height;
      const double x = static_cast<double>(c) / width;
      double v = 0.0;
      if (y < 0.5) {
        v = x < 0.4 ? 60.0 : (x + 0.6 * y < 0.85 ? 170.0 : 110.0);
      } else {
        // oriented stripes, period ~8 px at 30 degrees
        const double u = c * std::cos(pi / 6) + r * std::sin(pi / 6);
        v = std::fmod(u, 8.0) < 4.0 ? 200.0 : 50.0;
        if (x > 0.75) v = 130.0;
      }
      img.at(r, c) = v;
    }
  }
  return img;
}

Image smooth_gradient(int height, int width) {
  Image img(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double y = static_cast<double>(r) / std::max(1, height - 1);
      const double x = static_cast<double>(c) / std::max(1, width - 1);
      const double bump = std::exp(-((x - 0.6) * (x - 0.6) + (y - 0.4) * (y - 0.4)) / 0.08);
      img.at(r, c) = 40.0 + 120.0 * x + 50.0 * y + 40.0 * bump;
    }
  }
  return img;
}

Image directional_texture(int height, int width, std::uint64_t seed) {
  Rng rng(seed);
  constexpr int kTile = 32;
  const int tiles_r = (height + kTile - 1) / kTile;
  const int tiles_c = (width + kTile - 1) / kTile;
  std::vector<double> angle(static_cast<std::size_t>(tiles_r) * tiles_c);
  std::vector<double> period(angle.size());
  for (std::size_t t = 0; t < angle.size(); ++t) {
    angle[t] = std::numbers::pi * rng.uniform();
    period[t] = 5.0 + 5.0 * rng.uniform();
  }
  Image img(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const std::size_t t = static_cast<std::size_t>(r / kTile) * tiles_c + c / kTile;
      const double u = c * std::cos(angle[t]) + r * std::sin(angle[t]);
      img.at(r, c) = 128.0 + 90.0 * std::sin(2.0 * std::numbers::pi * u / period[t]);
    }
  }
  return img;
}

ComplexImage mri_phantom(int height, int width) {
  struct Ellipse {
    double cx, cy, ax, ay, rot, value;
  };
  // modified Shepp-Logan layout in normalized [-1, 1] coordinates
  constexpr std::array<Ellipse, 8> shapes{{
      {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},
      {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
      {0.22, 0.0, 0.11, 0.31, -0.31, -0.2},
      {-0.22, 0.0, 0.16, 0.41, 0.31, -0.2},
      {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},
      {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
      {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
      {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  }};
  ComplexImage img(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double x = 2.0 * (c + 0.5) / width - 1.0;
      const double y = 1.0 - 2.0 * (r + 0.5) / height;
      double v = 0.0;
      for (const auto& e : shapes) {
        const double dx = x - e.cx;
        const double dy = y - e.cy;
        const double xr = dx * std::cos(e.rot) + dy * std::sin(e.rot);
        const double yr = -dx * std::sin(e.rot) + dy * std::cos(e.rot);
        if ((xr * xr) / (e.ax * e.ax) + (yr * yr) / (e.ay * e.ay) <= 1.0) v += e.value;
      }
      v *= 1.0 + 0.15 * x;  // shading
      const double phase = 0.3 * x + 0.2 * y;
      img.at(r, c) = std::polar(std::max(v, 0.0), phase);
    }
  }
  return img;
}

}  // namespace frist
