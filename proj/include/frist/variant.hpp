#pragma once

#include <string>

namespace frist {

/// Which sparsifying model an application runs with.
enum class ModelVariant {
  frist,  // learned parent transform with flip/rotation operators
  sst,    // learned single square transform (identity operator only)
  dct,    // fixed 2D DCT, identity operator only, no learning
};

ModelVariant parse_variant(const std::string& name);
std::string to_string(ModelVariant v);

}  // namespace frist
