#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "medc/image.hpp"

namespace medc {

/// Reads an 8-bit PNG. Palette images expand to RGB, 16-bit depth and alpha
/// are stripped; the result has 1 or 3 channels.
ImageBuffer read_png(const std::filesystem::path& path);

/// Encodes to PNG in memory with fixed settings, so identical pixels give
/// identical bytes (this is what manifest hashes are computed over).
std::vector<std::uint8_t> encode_png(const ImageBuffer& img);

void write_png(const ImageBuffer& img, const std::filesystem::path& path);

/// Baseline JPEG encode at the given quality (1..100), default chroma
/// subsampling, in memory.
std::vector<std::uint8_t> encode_jpeg(const ImageBuffer& img, int quality);

/// Decodes a JPEG buffer, forcing the output to `channels` (1 or 3).
ImageBuffer decode_jpeg(const std::vector<std::uint8_t>& bytes, int channels);

}  // namespace medc
