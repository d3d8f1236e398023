#include "frist/variant.hpp"

#include "frist/types.hpp"

namespace frist {

ModelVariant parse_variant(const std::string& name) {
  if (name == "frist") return ModelVariant::frist;
  if (name == "sst") return ModelVariant::sst;
  if (name == "dct") return ModelVariant::dct;
  throw ConfigError("unknown model variant '" + name + "'");
}

std::string to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::frist: return "frist";
    case ModelVariant::sst: return "sst";
    case ModelVariant::dct: return "dct";
  }
  return "?";
}

}  // namespace frist
