#pragma once

// Classical tamper-evidence operators. Every map-producing operator returns a
// GrayMap with finite values in [0,1] and the dimensions of its input.

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "docforensics/image.hpp"

namespace docforensics::forensic_ops {

// ---------------------------------------------------------------- ELA

inline constexpr int kDefaultElaQuality = 90;

/// Per-pixel mean over channels of |image - jpeg_roundtrip(image, quality)| / 255,
/// not normalized. Used for absolute summaries.
GrayMap ela_difference(const Raster& image, int quality = kDefaultElaQuality);

/// ela_difference, max-normalized. Throws EncodeFailure on bad quality or
/// InvalidArgument for images smaller than 8x8.
GrayMap ela_map(const Raster& image, int quality = kDefaultElaQuality);

// ---------------------------------------------------------------- noise

struct MedianDenoiser {
  int k = 3;
};
struct GaussianDenoiser {
  double sigma = 1.0;
};
using Denoiser = std::variant<MedianDenoiser, GaussianDenoiser>;

/// Median filter with edge replication. k must be odd and >= 3.
GrayMap median_filter(const GrayMap& plane, int k);

/// |luma - denoise(luma)| in 8-bit units.
GrayMap noise_residual_raw(const Raster& image, const Denoiser& denoiser);

/// noise_residual_raw, max-normalized.
GrayMap noise_residual(const Raster& image, const Denoiser& denoiser);

// ---------------------------------------------------------------- DCT

using Block = std::array<double, 64>;  // row-major, [v * 8 + u]

struct DctBlockGrid {
  int blocks_x = 0;
  int blocks_y = 0;
  int image_width = 0;
  int image_height = 0;
  int pad_right = 0;   // columns added by edge replication
  int pad_bottom = 0;  // rows added by edge replication
  std::vector<Block> blocks;  // row-major over the block grid

  Block& at(int bx, int by) { return blocks[static_cast<std::size_t>(by) * blocks_x + bx]; }
  const Block& at(int bx, int by) const { return blocks[static_cast<std::size_t>(by) * blocks_x + bx]; }
};

/// Orthonormal 8x8 DCT-II of one block.
Block dct8x8(const Block& pixels);
Block idct8x8(const Block& coefficients);

/// Orthonormal DCT-II of every 8x8 block of the level-shifted (-128) luma
/// plane. The plane is padded to a multiple of 8 by edge replication.
DctBlockGrid block_dct(const Raster& image);

inline constexpr int kDctHistogramBins = 16;
using AcHistogram = std::array<double, kDctHistogramBins>;

/// Normalized histogram of the 63 AC energies (coefficient squared) over
/// log-spaced bins: bin 0 holds energies below 1, bins 1..15 split
/// [1, 1e6] evenly in log10, larger energies land in bin 15.
AcHistogram ac_energy_histogram(const Block& block);

/// Per-block L1 distance between the block histogram and the mean histogram
/// of its (up to 8) neighbours, nearest-upsampled and max-normalized.
/// Requires at least 3x3 blocks.
GrayMap dct_anomaly_map(const DctBlockGrid& grid);

// ---------------------------------------------------------------- colour

struct YCbCrPlanes {
  GrayMap y;
  GrayMap cb;  // 0.5 + (Cb - 128) / 255, so neutral grey maps to exactly 0.5
  GrayMap cr;
};

/// BT.601 full-range conversion.
YCbCrPlanes to_ycbcr(const Raster& image);
Raster from_ycbcr(const YCbCrPlanes& planes);

// ---------------------------------------------------------------- edges

struct EdgeSample {
  double x = 0.0;
  double y = 0.0;
  double width_px = 1.0;
};

struct EdgeBlurProfile {
  std::vector<EdgeSample> samples;
  std::optional<int> region_id;

  double mean_width() const;
};

inline constexpr int kEdgeSampleStride = 8;
inline constexpr double kEdgeGradientThreshold = 16.0 / 255.0;

/// Scans rows and columns of the region every kEdgeSampleStride pixels and
/// measures the 10%-90% transition width at each gradient maximum above
/// threshold. Throws NoEdges when nothing qualifies.
EdgeBlurProfile edge_blur_profile(const Raster& image, const Region& region,
                                  std::optional<int> region_id = std::nullopt);

// ---------------------------------------------------------------- SRM

/// Residual truncation in 8-bit units before normalization.
inline constexpr double kSrmTruncation = 16.0;

using Kernel5 = std::array<double, 25>;

/// The three rich-model high-pass kernels, as 5x5 arrays (row-major):
///  0: first-order horizontal     [-1 1] at the centre
///  1: second-order horizontal    1/2 [1 -2 1]
///  2: 5x5 "KV" square            1/12 [[-1 2 -2 2 -1] [2 -6 8 -6 2] [-2 8 -12 8 -2] ...]
const std::array<Kernel5, 3>& srm_kernels();

/// Correlates luma with each kernel (edge replication), clamps |r| at
/// kSrmTruncation and max-normalizes each plane.
std::array<GrayMap, 3> srm_residuals(const Raster& image);

}  // namespace docforensics::forensic_ops
