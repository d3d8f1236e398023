#pragma once

#include <cstdint>
#include <random>

#include "frist/image.hpp"

namespace frist {

/// Seeded generator whose draws depend only on the seed (mt19937_64 plus
/// explicit conversions, no implementation-defined distributions).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();               // [0, 1)
  std::uint64_t below(std::uint64_t bound);  // [0, bound)
  double normal();                // standard normal (Box-Muller)

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed);

/// Flat regions plus a band of oriented stripes, values in [0, 255].
Image piecewise_stripes(int height, int width);

/// Smooth two-dimensional intensity ramp with a gentle bump.
Image smooth_gradient(int height, int width);

/// Tiles of sinusoidal gratings at different orientations.
Image directional_texture(int height, int width, std::uint64_t seed);

/// Ellipse phantom with a smooth intensity profile and slowly varying phase.
ComplexImage mri_phantom(int height, int width);

}  // namespace frist
