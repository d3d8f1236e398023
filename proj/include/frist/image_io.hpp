#pragma once

#include <filesystem>

#include "frist/image.hpp"

namespace frist {

/// Binary 8-bit (or 16-bit, rescaled to [0, 255]) "P5" graymap.
Image read_pgm(const std::filesystem::path& path);
/// Values are rounded and clipped to [0, 255].
void write_pgm(const std::filesystem::path& path, const Image& image);

/// Single-channel little-endian float map ("Pf", negative scale, rows stored
/// bottom to top).
Image read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const Image& image);

/// "CPX1", u32 H, u32 W, then H*W interleaved (re, im) f64, row-major,
/// little-endian.
ComplexImage read_cpx(const std::filesystem::path& path);
void write_cpx(const std::filesystem::path& path, const ComplexImage& image);

/// PGM mask: 0 = missing / unsampled, anything else = available / sampled.
Mask read_mask(const std::filesystem::path& path);
/// Written as 0 / 255.
void write_mask(const std::filesystem::path& path, const Mask& mask);

/// Reads PGM or PFM by extension (".pfm" selects PFM).
Image read_image(const std::filesystem::path& path);

}  // namespace frist
