#pragma once

#include <utility>
#include <vector>

#include "frist/image.hpp"
#include "frist/types.hpp"

namespace frist {

struct Anchor {
  int row = 0;
  int col = 0;
};

/// Columns are row-major vectorized patch_side x patch_side patches.
template <typename T>
struct BasicPatchSet {
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> data;
  std::vector<Anchor> positions;
  int height = 0;
  int width = 0;
  int patch_side = 0;
  int stride = 1;
  bool wrap = false;

  long count() const { return static_cast<long>(positions.size()); }
};

using PatchSet = BasicPatchSet<double>;
using ComplexPatchSet = BasicPatchSet<Complex>;

template <typename T>
struct Aggregated {
  BasicImage<T> image;
  std::vector<int> coverage;  // patches covering each pixel; 0 = uncovered

  long uncovered() const {
    long u = 0;
    for (int c : coverage) u += c == 0;
    return u;
  }
};

/// Anchor grid: rows/cols 0, stride, 2*stride, ... Without wrap the last
/// in-bounds anchor is appended when the stride skips it so that every
/// pixel is covered; with wrap all anchors below the image size are used.
std::vector<Anchor> anchor_grid(int height, int width, int patch_side, int stride, bool wrap);

template <typename T>
BasicPatchSet<T> extract(const BasicImage<T>& image, int patch_side, int stride, bool wrap) {
  if (patch_side < 1 || stride < 1) throw ConfigError("patch side and stride must be >= 1");
  if (patch_side > std::min(image.height, image.width))
    throw ConfigError("patch larger than the image");
  BasicPatchSet<T> ps;
  ps.height = image.height;
  ps.width = image.width;
  ps.patch_side = patch_side;
  ps.stride = stride;
  ps.wrap = wrap;
  ps.positions = anchor_grid(image.height, image.width, patch_side, stride, wrap);
  const int n = patch_side * patch_side;
  ps.data.resize(n, static_cast<Eigen::Index>(ps.positions.size()));
  for (std::size_t i = 0; i < ps.positions.size(); ++i) {
    const auto [r0, c0] = ps.positions[i];
    for (int dr = 0; dr < patch_side; ++dr) {
      const int r = (r0 + dr) % image.height;
      for (int dc = 0; dc < patch_side; ++dc)
        ps.data(dr * patch_side + dc, static_cast<Eigen::Index>(i)) = image.at(r, (c0 + dc) % image.width);
    }
  }
  return ps;
}

/// Per-pixel mean of all covering patch values, accumulated in patch order.
template <typename T>
Aggregated<T> aggregate(const BasicPatchSet<T>& patches) {
  Aggregated<T> out{BasicImage<T>(patches.height, patches.width),
                    std::vector<int>(static_cast<std::size_t>(patches.height) * patches.width, 0)};
  const int side = patches.patch_side;
  for (std::size_t i = 0; i < patches.positions.size(); ++i) {
    const auto [r0, c0] = patches.positions[i];
    for (int dr = 0; dr < side; ++dr) {
      const int r = (r0 + dr) % patches.height;
      for (int dc = 0; dc < side; ++dc) {
        const int c = (c0 + dc) % patches.width;
        out.image.at(r, c) += patches.data(dr * side + dc, static_cast<Eigen::Index>(i));
        ++out.coverage[static_cast<std::size_t>(r) * patches.width + c];
      }
    }
  }
  for (std::size_t p = 0; p < out.coverage.size(); ++p)
    if (out.coverage[p] > 0) out.image.pixels[p] /= static_cast<double>(out.coverage[p]);
  return out;
}

/// Mean-subtracted copy of the patch columns (and the removed means).
std::pair<Matrix, Vector> subtract_patch_means(const Matrix& patches);

}  // namespace frist
