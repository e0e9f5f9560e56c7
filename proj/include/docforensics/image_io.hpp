#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "docforensics/image.hpp"

namespace docforensics::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

/// Writes via a temporary sibling and rename, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

std::vector<std::uint8_t> encode_png(const Raster& image);
/// 8-bit grayscale PNG of a [0,1] map.
std::vector<std::uint8_t> encode_png_gray(const GrayMap& map);
/// 1-bit PNG; pixels with value >= 0.5 are set.
std::vector<std::uint8_t> encode_png_mask(const GrayMap& mask);

/// Decodes PNG (any bit depth/color type, alpha dropped) or baseline/progressive JPEG.
Raster decode_image(std::span<const std::uint8_t> bytes);
/// Decodes a PNG into a [0,1] single-channel map (luma of colour images).
GrayMap decode_png_gray(std::span<const std::uint8_t> bytes);

/// Encodes a real JPEG through libjpeg. Extra APPn segments are written
/// verbatim after SOI: each entry is {marker, payload}.
struct AppSegment {
  int marker = 0xE1;
  std::vector<std::uint8_t> payload;
};
std::vector<std::uint8_t> encode_jpeg(const Raster& image, int quality,
                                      const std::vector<AppSegment>& app_segments = {});

bool looks_like_jpeg(std::span<const std::uint8_t> bytes);
bool looks_like_png(std::span<const std::uint8_t> bytes);

}  // namespace docforensics::io
