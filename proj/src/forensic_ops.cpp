#include "docforensics/forensic_ops.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "docforensics/errors.hpp"
#include "docforensics/jpeg_codec.hpp"

namespace docforensics::forensic_ops {

// ---------------------------------------------------------------- ELA

GrayMap ela_difference(const Raster& image, int quality) {
  if (image.width() < 8 || image.height() < 8) throw InvalidArgument("ELA needs at least 8x8 pixels");
  const Raster recompressed = codec::jpeg_roundtrip(image, quality);
  GrayMap diff(image.width(), image.height());
  auto& out = diff.values();
  const auto& a = image.data();
  const auto& b = recompressed.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    int sum = 0;
    for (int c = 0; c < 3; ++c) sum += std::abs(int{a[i * 3 + c]} - int{b[i * 3 + c]});
    out[i] = sum / (3.0 * 255.0);
  }
  return diff;
}

GrayMap ela_map(const Raster& image, int quality) {
  GrayMap map = ela_difference(image, quality);
  map.normalize_max();
  return map;
}

// ---------------------------------------------------------------- noise

GrayMap median_filter(const GrayMap& plane, int k) {
  if (k < 3 || k % 2 == 0) throw InvalidArgument("median kernel must be odd and >= 3");
  const int r = k / 2;
  GrayMap out(plane.width(), plane.height());
  std::vector<double> window(static_cast<std::size_t>(k) * k);
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      std::size_t n = 0;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) window[n++] = plane.clamped(x + dx, y + dy);
      auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
      std::nth_element(window.begin(), mid, window.end());
      out.at(x, y) = *mid;
    }
  }
  return out;
}

GrayMap noise_residual_raw(const Raster& image, const Denoiser& denoiser) {
  const GrayMap gray = luma(image);
  GrayMap smooth;
  if (const auto* m = std::get_if<MedianDenoiser>(&denoiser)) {
    smooth = median_filter(gray, m->k);
  } else {
    const double sigma = std::get<GaussianDenoiser>(denoiser).sigma;
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian sigma must be positive");
    smooth = gaussian_blur(gray, sigma);
  }
  GrayMap residual(gray.width(), gray.height());
  for (std::size_t i = 0; i < residual.values().size(); ++i) {
    residual.values()[i] = std::abs(gray.values()[i] - smooth.values()[i]);
  }
  return residual;
}

GrayMap noise_residual(const Raster& image, const Denoiser& denoiser) {
  GrayMap map = noise_residual_raw(image, denoiser);
  map.normalize_max();
  return map;
}

// ---------------------------------------------------------------- DCT

DctBlockGrid block_dct(const Raster& image) {
  const GrayMap y = luma(image);
  DctBlockGrid grid;
  grid.image_width = image.width();
  grid.image_height = image.height();
  grid.blocks_x = (image.width() + 7) / 8;
  grid.blocks_y = (image.height() + 7) / 8;
  grid.pad_right = grid.blocks_x * 8 - image.width();
  grid.pad_bottom = grid.blocks_y * 8 - image.height();
  grid.blocks.resize(static_cast<std::size_t>(grid.blocks_x) * grid.blocks_y);
  for (int by = 0; by < grid.blocks_y; ++by) {
    for (int bx = 0; bx < grid.blocks_x; ++bx) {
      Block px{};
      for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) px[j * 8 + i] = y.clamped(bx * 8 + i, by * 8 + j) - 128.0;
      grid.at(bx, by) = dct8x8(px);
    }
  }
  return grid;
}

AcHistogram ac_energy_histogram(const Block& block) {
  AcHistogram h{};
  for (int i = 1; i < 64; ++i) {
    const double e = block[i] * block[i];
    int bin = 0;
    if (e >= 1.0) {
      bin = 1 + static_cast<int>(std::floor(std::log10(e) / 6.0 * (kDctHistogramBins - 1)));
      bin = std::min(bin, kDctHistogramBins - 1);
    }
    h[bin] += 1.0 / 63.0;
  }
  return h;
}

GrayMap dct_anomaly_map(const DctBlockGrid& grid) {
  if (grid.blocks_x < 3 || grid.blocks_y < 3) throw InvalidArgument("DCT anomaly map needs at least 3x3 blocks");
  std::vector<AcHistogram> hist(grid.blocks.size());
  std::transform(grid.blocks.begin(), grid.blocks.end(), hist.begin(), ac_energy_histogram);

  std::vector<double> anomaly(grid.blocks.size(), 0.0);
  for (int by = 0; by < grid.blocks_y; ++by) {
    for (int bx = 0; bx < grid.blocks_x; ++bx) {
      AcHistogram mean{};
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = bx + dx, ny = by + dy;
          if ((dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= grid.blocks_x || ny >= grid.blocks_y) continue;
          const auto& nh = hist[static_cast<std::size_t>(ny) * grid.blocks_x + nx];
          for (int b = 0; b < kDctHistogramBins; ++b) mean[b] += nh[b];
          ++n;
        }
      const auto& own = hist[static_cast<std::size_t>(by) * grid.blocks_x + bx];
      double l1 = 0.0;
      for (int b = 0; b < kDctHistogramBins; ++b) l1 += std::abs(own[b] - mean[b] / n);
      anomaly[static_cast<std::size_t>(by) * grid.blocks_x + bx] = l1;
    }
  }

  GrayMap map(grid.image_width, grid.image_height);
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      map.at(x, y) = anomaly[static_cast<std::size_t>(y / 8) * grid.blocks_x + x / 8];
  map.normalize_max();
  return map;
}

// ---------------------------------------------------------------- colour

YCbCrPlanes to_ycbcr(const Raster& image) {
  YCbCrPlanes p{GrayMap(image.width(), image.height()), GrayMap(image.width(), image.height()),
                GrayMap(image.width(), image.height())};
  for (std::size_t i = 0; i < p.y.values().size(); ++i) {
    const double r = image.data()[i * 3], g = image.data()[i * 3 + 1], b = image.data()[i * 3 + 2];
    p.y.values()[i] = (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    p.cb.values()[i] = 0.5 + (-0.168736 * r - 0.331264 * g + 0.5 * b) / 255.0;
    p.cr.values()[i] = 0.5 + (0.5 * r - 0.418688 * g - 0.081312 * b) / 255.0;
  }
  return p;
}

Raster from_ycbcr(const YCbCrPlanes& planes) {
  Raster out(planes.y.width(), planes.y.height());
  for (std::size_t i = 0; i < planes.y.values().size(); ++i) {
    const double y = planes.y.values()[i] * 255.0;
    const double cb = (planes.cb.values()[i] - 0.5) * 255.0;
    const double cr = (planes.cr.values()[i] - 0.5) * 255.0;
    out.data()[i * 3] = clamp_u8(y + 1.402 * cr);
    out.data()[i * 3 + 1] = clamp_u8(y - 0.344136 * cb - 0.714136 * cr);
    out.data()[i * 3 + 2] = clamp_u8(y + 1.772 * cb);
  }
  return out;
}

// ---------------------------------------------------------------- edges

double EdgeBlurProfile::mean_width() const {
  if (samples.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : samples) s += e.width_px;
  return s / samples.size();
}

namespace {

// Position where a monotone segment of `profile` between a and b crosses `level`.
double crossing(const std::vector<double>& profile, int a, int b, double level) {
  const bool rising = profile[b] > profile[a];
  for (int i = a; i < b; ++i) {
    const double p0 = profile[i], p1 = profile[i + 1];
    const bool hit = rising ? (p0 <= level && level <= p1) : (p0 >= level && level >= p1);
    if (hit && p1 != p0) return i + (level - p0) / (p1 - p0);
    if (hit) return i;
  }
  return b;
}

// Measures transitions along one line. `along` holds the samples on the
// line, `across` the gradient perpendicular to it at the same positions.
void scan_line(const std::vector<double>& along, const std::vector<double>& across,
               const std::function<void(double pos, double width)>& emit) {
  const int n = static_cast<int>(along.size());
  if (n < 3) return;
  std::vector<double> g(n, 0.0);
  for (int i = 1; i + 1 < n; ++i) g[i] = (along[i + 1] - along[i - 1]) / 2.0;
  for (int i = 1; i + 1 < n; ++i) {
    const double m = std::abs(g[i]);
    if (m < kEdgeGradientThreshold) continue;
    if (m < std::abs(g[i - 1]) || m <= std::abs(g[i + 1])) continue;
    if (std::abs(across[i]) > m) continue;
    const double s = g[i] > 0 ? 1.0 : -1.0;
    int a = i, b = i;
    while (a - 1 >= 0 && s * (along[a] - along[a - 1]) > 0) --a;
    while (b + 1 < n && s * (along[b + 1] - along[b]) > 0) ++b;
    const double delta = along[b] - along[a];
    const double p10 = crossing(along, a, b, along[a] + 0.1 * delta);
    const double p90 = crossing(along, a, b, along[a] + 0.9 * delta);
    const double p50 = crossing(along, a, b, along[a] + 0.5 * delta);
    emit(p50, std::max(1.0, std::abs(p90 - p10)));
  }
}

}  // namespace

EdgeBlurProfile edge_blur_profile(const Raster& image, const Region& region, std::optional<int> region_id) {
  if (!region.within(image.width(), image.height())) throw OutOfBounds("edge profile region outside image");
  GrayMap gray = luma(image);
  for (double& v : gray.values()) v /= 255.0;

  EdgeBlurProfile profile;
  profile.region_id = region_id;
  auto first_line = [](int start, int extent) { return extent < kEdgeSampleStride ? start + extent / 2 : start + kEdgeSampleStride / 2; };

  for (int y = first_line(region.y, region.h); y < region.bottom(); y += kEdgeSampleStride) {
    std::vector<double> along(region.w), across(region.w);
    for (int i = 0; i < region.w; ++i) {
      const int x = region.x + i;
      along[i] = gray.at(x, y);
      across[i] = (gray.clamped(x, y + 1) - gray.clamped(x, y - 1)) / 2.0;
    }
    scan_line(along, across, [&](double pos, double width) {
      profile.samples.push_back({region.x + pos, static_cast<double>(y), width});
    });
  }
  for (int x = first_line(region.x, region.w); x < region.right(); x += kEdgeSampleStride) {
    std::vector<double> along(region.h), across(region.h);
    for (int j = 0; j < region.h; ++j) {
      const int y = region.y + j;
      along[j] = gray.at(x, y);
      across[j] = (gray.clamped(x + 1, y) - gray.clamped(x - 1, y)) / 2.0;
    }
    scan_line(along, across, [&](double pos, double width) {
      profile.samples.push_back({static_cast<double>(x), region.y + pos, width});
    });
  }
  if (profile.samples.empty()) throw NoEdges("no gradient above threshold in region");
  return profile;
}

// ---------------------------------------------------------------- SRM

const std::array<Kernel5, 3>& srm_kernels() {
  static const std::array<Kernel5, 3> kernels = [] {
    std::array<Kernel5, 3> k{};
    // first order: I(x+1) - I(x)
    k[0][2 * 5 + 2] = -1.0;
    k[0][2 * 5 + 3] = 1.0;
    // second order: (I(x-1) - 2 I(x) + I(x+1)) / 2
    k[1][2 * 5 + 1] = 0.5;
    k[1][2 * 5 + 2] = -1.0;
    k[1][2 * 5 + 3] = 0.5;
    constexpr double kv[25] = {-1, 2,  -2, 2,  -1, 2,  -6, 8,  -6, 2,  -2, 8, -12,
                               8,  -2, 2,  -6, 8,  -6, 2,  -1, 2,  -2, 2,  -1};
    for (int i = 0; i < 25; ++i) k[2][i] = kv[i] / 12.0;
    return k;
  }();
  return kernels;
}

std::array<GrayMap, 3> srm_residuals(const Raster& image) {
  const GrayMap gray = luma(image);
  std::array<GrayMap, 3> out;
  const auto& kernels = srm_kernels();
  for (int k = 0; k < 3; ++k) {
    GrayMap plane(gray.width(), gray.height());
    for (int y = 0; y < gray.height(); ++y) {
      for (int x = 0; x < gray.width(); ++x) {
        double acc = 0.0;
        for (int j = -2; j <= 2; ++j)
          for (int i = -2; i <= 2; ++i) {
            const double w = kernels[k][(j + 2) * 5 + (i + 2)];
            if (w != 0.0) acc += w * gray.clamped(x + i, y + j);
          }
        // Kernels sum to zero; drop the rounding residue left on flat areas.
        if (std::abs(acc) < 1e-9) acc = 0.0;
        plane.at(x, y) = std::min(std::abs(acc), kSrmTruncation);
      }
    }
    plane.normalize_max();
    out[k] = std::move(plane);
  }
  return out;
}

}  // namespace docforensics::forensic_ops
