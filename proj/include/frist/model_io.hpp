#pragma once

#include <filesystem>
#include <iosfwd>

#include "frist/learning.hpp"

namespace frist {

// Binary model layout, all little-endian:
//   "FRST1", u32 n, u32 K, u32 num_angles, u32 patch_side, f64 lambda0,
//   u32 sparsity, K x (u32 angle_index, u8 flip), n*n f64 row-major W.
// Operator permutations are rebuilt on load.

void write_model(std::ostream& out, const FristModel& model);
FristModel read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const FristModel& model);
FristModel load_model(const std::filesystem::path& path);

}  // namespace frist
