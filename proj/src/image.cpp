#include "docforensics/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace docforensics {

Raster::Raster(int width, int height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height * 3, fill) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative raster size");
}

void Raster::set_rgb(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  at(x, y, 0) = r;
  at(x, y, 1) = g;
  at(x, y, 2) = b;
}

GrayMap::GrayMap(int width, int height, double fill)
    : width_(width), height_(height), values_(static_cast<std::size_t>(width) * height, fill) {
  if (width < 0 || height < 0) throw std::invalid_argument("negative map size");
}

double GrayMap::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

double GrayMap::max_value() const {
  if (values_.empty()) return 0.0;
  return *std::max_element(values_.begin(), values_.end());
}

double GrayMap::mean() const {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) / values_.size();
}

void GrayMap::normalize_max() {
  const double m = max_value();
  if (!(m > 0.0)) {
    std::fill(values_.begin(), values_.end(), 0.0);
    return;
  }
  for (double& v : values_) v = std::clamp(v / m, 0.0, 1.0);
}

Region Region::clamped_to(int width, int height) const {
  Region r = *this;
  const int x0 = std::clamp(x, 0, width);
  const int y0 = std::clamp(y, 0, height);
  const int x1 = std::clamp(x + w, 0, width);
  const int y1 = std::clamp(y + h, 0, height);
  r.x = x0;
  r.y = y0;
  r.w = std::max(0, x1 - x0);
  r.h = std::max(0, y1 - y0);
  return r;
}

double iou(const Region& a, const Region& b) {
  const int ix = std::max(0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
  const int iy = std::max(0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
  const double inter = static_cast<double>(ix) * iy;
  const double uni = static_cast<double>(a.w) * a.h + static_cast<double>(b.w) * b.h - inter;
  return uni > 0 ? inter / uni : 0.0;
}

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

GrayMap luma(const Raster& image) {
  GrayMap out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out.at(x, y) = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) +
                     0.114 * image.at(x, y, 2);
    }
  }
  return out;
}

Raster crop(const Raster& image, const Region& region) {
  if (!region.within(image.width(), image.height())) throw std::out_of_range("crop outside image");
  Raster out(region.w, region.h);
  for (int y = 0; y < region.h; ++y) {
    const auto* src = &image.data()[(static_cast<std::size_t>(region.y + y) * image.width() + region.x) * 3];
    std::copy(src, src + region.w * 3, &out.data()[static_cast<std::size_t>(y) * region.w * 3]);
  }
  return out;
}

Raster resize_bilinear(const Raster& image, int width, int height) {
  Raster out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = image.at(x0, y0, c) * (1 - wx) + image.at(x1, y0, c) * wx;
        const double bot = image.at(x0, y1, c) * (1 - wx) + image.at(x1, y1, c) * wx;
        out.at(x, y, c) = clamp_u8(top * (1 - wy) + bot * wy);
      }
    }
  }
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

namespace {

// Separable convolution of a single plane with edge replication.
std::vector<double> blur_plane(const std::vector<double>& plane, int w, int h,
                               const std::vector<double>& k) {
  const int r = static_cast<int>(k.size() / 2);
  std::vector<double> tmp(plane.size()), out(plane.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += k[i + r] * plane[static_cast<std::size_t>(y) * w + std::clamp(x + i, 0, w - 1)];
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) {
        acc += k[i + r] * tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

}  // namespace

GrayMap gaussian_blur(const GrayMap& map, double sigma) {
  if (sigma <= 0.0) return map;
  GrayMap out(map.width(), map.height());
  out.values() = blur_plane(map.values(), map.width(), map.height(), gaussian_kernel(sigma));
  return out;
}

Raster gaussian_blur(const Raster& image, double sigma) {
  if (sigma <= 0.0) return image;
  const auto k = gaussian_kernel(sigma);
  const int w = image.width(), h = image.height();
  Raster out(w, h);
  std::vector<double> plane(static_cast<std::size_t>(w) * h);
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] = image.data()[i * 3 + c];
    const auto blurred = blur_plane(plane, w, h, k);
    for (std::size_t i = 0; i < plane.size(); ++i) out.data()[i * 3 + c] = clamp_u8(blurred[i]);
  }
  return out;
}

}  // namespace docforensics
