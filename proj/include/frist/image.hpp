#pragma once

#include <cstdint>
#include <vector>

#include "frist/types.hpp"

namespace frist {

/// Row-major H x W grid.
template <typename T>
struct BasicImage {
  int height = 0;
  int width = 0;
  std::vector<T> pixels;

  BasicImage() = default;
  BasicImage(int h, int w, T fill = T{}) : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {
    if (h < 0 || w < 0) throw ConfigError("negative image dimensions");
  }

  std::size_t size() const { return pixels.size(); }
  T& at(int r, int c) { return pixels[static_cast<std::size_t>(r) * width + c]; }
  const T& at(int r, int c) const { return pixels[static_cast<std::size_t>(r) * width + c]; }
  bool same_shape(const auto& o) const { return height == o.height && width == o.width; }

  bool operator==(const BasicImage&) const = default;
};

using Image = BasicImage<double>;
using ComplexImage = BasicImage<Complex>;
/// Nonzero = available (inpainting) or sampled (k-space).
using Mask = BasicImage<std::uint8_t>;

/// Clips every value to [0, 255].
Image clamp_intensity(Image image);
double clamp_intensity(double v);
void clamp_intensity_inplace(Eigen::Ref<Vector> v);

/// 10 log10(peak^2 / MSE); +infinity when the images are identical.
double psnr(const Image& reference, const Image& test, double peak = 255.0);

double mse(const Image& a, const Image& b);

Image magnitude(const ComplexImage& image);
ComplexImage to_complex(const Image& image);

}  // namespace frist
