#include "frist/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace frist {

namespace {

constexpr std::array<char, 5> kMagic{'F', 'R', 'S', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

std::uint64_t get_bytes(std::istream& in, int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw IoError("truncated model file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_bytes(in, 8)); }

}  // namespace

void write_model(std::ostream& out, const FristModel& model) {
  const auto n = static_cast<std::uint32_t>(model.dim());
  if (model.parent.rows() != n || model.parent.cols() != n)
    throw ConfigError("parent transform does not match the patch size");
  out.write(kMagic.data(), kMagic.size());
  put_u32(out, n);
  put_u32(out, static_cast<std::uint32_t>(model.operators.size()));
  put_u32(out, static_cast<std::uint32_t>(model.num_angles));
  put_u32(out, static_cast<std::uint32_t>(model.patch_side));
  put_f64(out, model.lambda0);
  put_u32(out, static_cast<std::uint32_t>(model.sparsity));
  for (const auto& op : model.operators) {
    put_u32(out, static_cast<std::uint32_t>(op.angle_index));
    out.put(op.flip ? 1 : 0);
  }
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) put_f64(out, model.parent(r, c));
  if (!out) throw IoError("failed to write model");
}

FristModel read_model(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a FRST1 model file");
  FristModel m;
  const std::uint32_t n = get_u32(in);
  const std::uint32_t k = get_u32(in);
  m.num_angles = static_cast<int>(get_u32(in));
  m.patch_side = static_cast<int>(get_u32(in));
  m.lambda0 = get_f64(in);
  m.sparsity = static_cast<int>(get_u32(in));
  if (m.patch_side < 1 || static_cast<std::uint32_t>(m.patch_side * m.patch_side) != n)
    throw IoError("model header: n is not patch_side^2");
  if (k < 1 || k > static_cast<std::uint32_t>(2 * m.num_angles))
    throw IoError("model header: bad operator count");
  try {
    for (std::uint32_t i = 0; i < k; ++i) {
      const auto q = static_cast<int>(get_u32(in));
      const bool flip = get_bytes(in, 1) != 0;
      m.operators.push_back(make_operator(q, flip, m.num_angles, m.patch_side));
    }
  } catch (const ConfigError& e) {
    throw IoError(std::string("model operators: ") + e.what());
  }
  m.parent.resize(n, n);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) m.parent(r, c) = get_f64(in);
  return m;
}

void save_model(const std::filesystem::path& path, const FristModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_model(out, model);
}

FristModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_model(in);
}

}  // namespace frist
