#include "frist/patches.hpp"

namespace frist {

std::vector<Anchor> anchor_grid(int height, int width, int patch_side, int stride, bool wrap) {
  auto axis = [&](int extent) {
    std::vector<int> pos;
    if (wrap) {
      for (int p = 0; p < extent; p += stride) pos.push_back(p);
    } else {
      const int last = extent - patch_side;
      for (int p = 0; p <= last; p += stride) pos.push_back(p);
      if (pos.back() != last) pos.push_back(last);
    }
    return pos;
  };
  const auto rows = axis(height);
  const auto cols = axis(width);
  std::vector<Anchor> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows)
    for (int c : cols) out.push_back({r, c});
  return out;
}

std::pair<Matrix, Vector> subtract_patch_means(const Matrix& patches) {
  const Vector means = patches.colwise().mean().transpose();
  Matrix centered = patches.rowwise() - means.transpose();
  return {std::move(centered), means};
}

}  // namespace frist
