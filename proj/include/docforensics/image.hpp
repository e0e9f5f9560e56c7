#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace docforensics {

/// 8-bit RGB image, interleaved, row-major, origin top-left.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, std::uint8_t fill = 0);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * 3 + c];
  }
  void set_rgb(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  std::vector<std::uint8_t>& data() { return data_; }
  const std::vector<std::uint8_t>& data() const { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Single-channel float map. Evidence maps keep values in [0,1]; the same
/// container also carries un-normalized intermediates (e.g. luma in 8-bit units).
class GrayMap {
 public:
  GrayMap() = default;
  GrayMap(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }

  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  /// Edge-replicated read.
  double clamped(int x, int y) const;

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double max_value() const;
  double mean() const;

  /// Divides by the maximum; an all-zero map stays all-zero.
  void normalize_max();

  bool operator==(const GrayMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Axis-aligned box in pixel coordinates.
struct Region {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  std::string label;
  double score = 1.0;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  double center_x() const { return x + w / 2.0; }
  double center_y() const { return y + h / 2.0; }
  bool contains(double px, double py) const {
    return px >= x && px < x + w && py >= y && py < y + h;
  }
  bool within(int width, int height) const {
    return w >= 1 && h >= 1 && x >= 0 && y >= 0 && x + w <= width && y + h <= height;
  }
  /// Intersection with the image rectangle; w or h is 0 when empty.
  Region clamped_to(int width, int height) const;
};

double iou(const Region& a, const Region& b);

struct Point {
  int x = 0;
  int y = 0;
};

/// BT.601 luma in 8-bit units (not rounded).
GrayMap luma(const Raster& image);

/// Copies a sub-rectangle; the region must lie inside the image.
Raster crop(const Raster& image, const Region& region);

/// Bilinear resample to the given size (pixel-centre convention).
Raster resize_bilinear(const Raster& image, int width, int height);

/// Separable gaussian blur with edge replication, radius ceil(3 sigma).
Raster gaussian_blur(const Raster& image, double sigma);
GrayMap gaussian_blur(const GrayMap& map, double sigma);

/// Normalized 1-D gaussian taps, radius ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

std::uint8_t clamp_u8(double v);

}  // namespace docforensics
