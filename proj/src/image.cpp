#include "frist/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace frist {

double clamp_intensity(double v) { return std::clamp(v, 0.0, 255.0); }

Image clamp_intensity(Image image) {
  for (double& v : image.pixels) v = clamp_intensity(v);
  return image;
}

void clamp_intensity_inplace(Eigen::Ref<Vector> v) { v = v.cwiseMax(0.0).cwiseMin(255.0); }

double mse(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ConfigError("image dimensions differ");
  if (a.size() == 0) throw ConfigError("empty image");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const Image& reference, const Image& test, double peak) {
  if (!(peak > 0)) throw ConfigError("peak must be positive");
  const double e = mse(reference, test);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

Image magnitude(const ComplexImage& image) {
  Image out(image.height, image.width);
  for (std::size_t i = 0; i < image.size(); ++i) out.pixels[i] = std::abs(image.pixels[i]);
  return out;
}

ComplexImage to_complex(const Image& image) {
  ComplexImage out(image.height, image.width);
  for (std::size_t i = 0; i < image.size(); ++i) out.pixels[i] = image.pixels[i];
  return out;
}

}  // namespace frist
