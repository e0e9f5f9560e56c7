#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "docforensics/errors.hpp"
#include "docforensics/forensic_ops.hpp"
#include "docforensics/jpeg_codec.hpp"

namespace docforensics {

namespace {

using Matrix8 = std::array<double, 64>;

// basis[u * 8 + x] = a(u) cos((2x + 1) u pi / 16)
const Matrix8& dct_basis() {
  static const Matrix8 basis = [] {
    Matrix8 m{};
    for (int u = 0; u < 8; ++u) {
      const double a = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) {
        m[u * 8 + x] = a * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
    return m;
  }();
  return basis;
}

constexpr std::array<int, 64> kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<int, 64> kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

}  // namespace

namespace forensic_ops {

Block dct8x8(const Block& pixels) {
  const auto& c = dct_basis();
  Block tmp{}, out{};
  // rows: tmp[y][u] = sum_x c[u][x] p[y][x]
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += c[u * 8 + x] * pixels[y * 8 + x];
      tmp[y * 8 + u] = acc;
    }
  // columns: out[v][u] = sum_y c[v][y] tmp[y][u]
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += c[v * 8 + y] * tmp[y * 8 + u];
      out[v * 8 + u] = acc;
    }
  return out;
}

Block idct8x8(const Block& coefficients) {
  const auto& c = dct_basis();
  Block tmp{}, out{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += c[u * 8 + x] * coefficients[v * 8 + u];
      tmp[v * 8 + x] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += c[v * 8 + y] * tmp[v * 8 + x];
      out[y * 8 + x] = acc;
    }
  return out;
}

}  // namespace forensic_ops

namespace codec {

QuantTable quant_table(bool chroma, int quality) {
  if (quality < 1 || quality > 100) throw EncodeFailure("quality out of range: " + std::to_string(quality));
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  const auto& base = chroma ? kChromaBase : kLumaBase;
  QuantTable t{};
  for (int i = 0; i < 64; ++i) t[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  return t;
}

Raster jpeg_roundtrip(const Raster& image, int quality) {
  const QuantTable tables[2] = {quant_table(false, quality), quant_table(true, quality)};
  const int w = image.width(), h = image.height();
  if (w == 0 || h == 0) return image;

  // Integer YCbCr samples, as a real encoder would hold them.
  std::vector<double> planes[3];
  for (auto& p : planes) p.resize(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < planes[0].size(); ++i) {
    const double r = image.data()[i * 3], g = image.data()[i * 3 + 1], b = image.data()[i * 3 + 2];
    planes[0][i] = clamp_u8(0.299 * r + 0.587 * g + 0.114 * b);
    planes[1][i] = clamp_u8(-0.168736 * r - 0.331264 * g + 0.5 * b + 128.0);
    planes[2][i] = clamp_u8(0.5 * r - 0.418688 * g - 0.081312 * b + 128.0);
  }

  const int bx_count = (w + 7) / 8, by_count = (h + 7) / 8;
  for (int p = 0; p < 3; ++p) {
    const auto& q = tables[p == 0 ? 0 : 1];
    auto& plane = planes[p];
    std::vector<double> decoded(plane.size());
    for (int by = 0; by < by_count; ++by) {
      for (int bx = 0; bx < bx_count; ++bx) {
        forensic_ops::Block block{};
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const int sx = std::min(bx * 8 + x, w - 1), sy = std::min(by * 8 + y, h - 1);
            block[y * 8 + x] = plane[static_cast<std::size_t>(sy) * w + sx] - 128.0;
          }
        auto coef = forensic_ops::dct8x8(block);
        for (int i = 0; i < 64; ++i) coef[i] = std::round(coef[i] / q[i]) * q[i];
        const auto rec = forensic_ops::idct8x8(coef);
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            const int sx = bx * 8 + x, sy = by * 8 + y;
            if (sx < w && sy < h) decoded[static_cast<std::size_t>(sy) * w + sx] = clamp_u8(rec[y * 8 + x] + 128.0);
          }
      }
    }
    plane = std::move(decoded);
  }

  Raster out(w, h);
  for (std::size_t i = 0; i < planes[0].size(); ++i) {
    const double y = planes[0][i], cb = planes[1][i] - 128.0, cr = planes[2][i] - 128.0;
    out.data()[i * 3] = clamp_u8(y + 1.402 * cr);
    out.data()[i * 3 + 1] = clamp_u8(y - 0.344136 * cb - 0.714136 * cr);
    out.data()[i * 3 + 2] = clamp_u8(y + 1.772 * cb);
  }
  return out;
}

}  // namespace codec
}  // namespace docforensics
