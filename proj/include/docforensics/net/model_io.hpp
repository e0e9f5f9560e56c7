#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "docforensics/net/model.hpp"

namespace docforensics::net {

// Model file layout, all integers little-endian:
//   "DFNM"                      magic
//   u32 version                 kModelFormatVersion
//   u32 n, n bytes              JSON header {"config": ..., "step": ..., "seed": ...}
//   u32 tensor count
//   per tensor (sorted by name):
//     u16 n, n bytes            name
//     u8  dtype                 1 = float32
//     u8  rank, rank x u32      dims
//     float32 x prod(dims)      values, IEEE-754 little-endian
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const ModelState& model);

/// Throws ModelLoadError on any inconsistency (bad magic, version, truncation,
/// tensors that do not match the config).
ModelState deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ModelState& model, const std::filesystem::path& path);
ModelState load_model(const std::filesystem::path& path);

}  // namespace docforensics::net
