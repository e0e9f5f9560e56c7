#pragma once

// Self-contained lossy JPEG round trip (no entropy coding): colour transform,
// 8x8 DCT, quantization with the Annex K tables scaled by quality, and back.
// Used for error level analysis and for giving synthetic documents a
// compression history. It is self-consistent, not bit-exact with libjpeg.

#include <array>

#include "docforensics/image.hpp"

namespace docforensics::codec {

using QuantTable = std::array<int, 64>;  // row-major

/// Annex K luminance (chroma=false) or chrominance table scaled with the
/// usual quality rule: scale = q < 50 ? 5000/q : 200 - 2q, entries clamped to [1,255].
QuantTable quant_table(bool chroma, int quality);

/// Compress/decompress at `quality` in 1..100 with 4:4:4 sampling.
/// Planes are padded to a multiple of 8 by edge replication.
/// Throws EncodeFailure for quality outside 1..100.
Raster jpeg_roundtrip(const Raster& image, int quality);

}  // namespace docforensics::codec
