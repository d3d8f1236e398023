#include "frist/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace frist {

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      if (!tok.empty()) break;
    } else {
      tok.push_back(static_cast<char>(c));
    }
    c = in.get();
  }
  if (tok.empty()) throw IoError("truncated image header");
  return tok;
}

int header_int(std::istream& in) {
  const std::string t = header_token(in);
  try {
    return std::stoi(t);
  } catch (const std::exception&) {
    throw IoError("bad header value '" + t + "'");
  }
}

std::uint64_t le_bytes(std::istream& in, int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i) {
    const int c = in.get();
    if (c == EOF) throw IoError("truncated file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

void put_le(std::ostream& out, std::uint64_t v, int count) {
  for (int i = 0; i < count; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

Image read_pgm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (header_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  const int w = header_int(in);
  const int h = header_int(in);
  const int maxval = header_int(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError(path.string() + ": bad PGM header");
  Image img(h, w);
  if (maxval < 256) {
    for (auto& p : img.pixels) {
      const int c = in.get();
      if (c == EOF) throw IoError(path.string() + ": truncated PGM data");
      p = static_cast<double>(c);
    }
  } else {
    for (auto& p : img.pixels) {
      const int hi = in.get();
      const int lo = in.get();
      if (lo == EOF || hi == EOF) throw IoError(path.string() + ": truncated PGM data");
      p = static_cast<double>((hi << 8) | lo) * 255.0 / maxval;
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  auto out = open_out(path);
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  for (double v : image.pixels) {
    const double r = std::round(std::clamp(v, 0.0, 255.0));
    out.put(static_cast<char>(static_cast<unsigned char>(r)));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Image read_pfm(const std::filesystem::path& path) {
  auto in = open_in(path);
  if (header_token(in) != "Pf") throw IoError(path.string() + ": not a grayscale PFM (Pf)");
  const int w = header_int(in);
  const int h = header_int(in);
  const std::string scale_tok = header_token(in);
  const double scale = std::stod(scale_tok);
  if (w <= 0 || h <= 0) throw IoError(path.string() + ": bad PFM header");
  const bool little = scale < 0;
  Image img(h, w);
  for (int r = h - 1; r >= 0; --r) {
    for (int c = 0; c < w; ++c) {
      auto bits = static_cast<std::uint32_t>(le_bytes(in, 4));
      if (!little) bits = __builtin_bswap32(bits);
      img.at(r, c) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return img;
}

void write_pfm(const std::filesystem::path& path, const Image& image) {
  auto out = open_out(path);
  out << "Pf\n" << image.width << ' ' << image.height << "\n-1.0\n";
  for (int r = image.height - 1; r >= 0; --r)
    for (int c = 0; c < image.width; ++c)
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(image.at(r, c))), 4);
  if (!out) throw IoError("failed writing " + path.string());
}

ComplexImage read_cpx(const std::filesystem::path& path) {
  auto in = open_in(path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "CPX1", 4) != 0) throw IoError(path.string() + ": not a CPX1 file");
  const auto h = static_cast<int>(le_bytes(in, 4));
  const auto w = static_cast<int>(le_bytes(in, 4));
  if (h <= 0 || w <= 0) throw IoError(path.string() + ": bad CPX dimensions");
  ComplexImage img(h, w);
  for (auto& p : img.pixels) {
    const double re = std::bit_cast<double>(le_bytes(in, 8));
    const double im = std::bit_cast<double>(le_bytes(in, 8));
    p = Complex(re, im);
  }
  return img;
}

void write_cpx(const std::filesystem::path& path, const ComplexImage& image) {
  auto out = open_out(path);
  out.write("CPX1", 4);
  put_le(out, static_cast<std::uint32_t>(image.height), 4);
  put_le(out, static_cast<std::uint32_t>(image.width), 4);
  for (const auto& p : image.pixels) {
    put_le(out, std::bit_cast<std::uint64_t>(p.real()), 8);
    put_le(out, std::bit_cast<std::uint64_t>(p.imag()), 8);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Mask read_mask(const std::filesystem::path& path) {
  const Image img = read_pgm(path);
  Mask m(img.height, img.width);
  for (std::size_t i = 0; i < img.size(); ++i) m.pixels[i] = img.pixels[i] != 0.0 ? 1 : 0;
  return m;
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  Image img(mask.height, mask.width);
  for (std::size_t i = 0; i < mask.size(); ++i) img.pixels[i] = mask.pixels[i] ? 255.0 : 0.0;
  write_pgm(path, img);
}

Image read_image(const std::filesystem::path& path) {
  return path.extension() == ".pfm" ? read_pfm(path) : read_pgm(path);
}

}  // namespace frist
