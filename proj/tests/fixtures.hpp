#pragma once

// Hand-built inputs shared by the unit tests and the acceptance runner.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "docforensics/image.hpp"
#include "docforensics/image_io.hpp"

namespace fixture {

using Bytes = std::vector<std::uint8_t>;

inline docforensics::Raster random_raster(int w, int h, std::mt19937_64& rng) {
  docforensics::Raster img(w, h);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : img.data()) v = static_cast<std::uint8_t>(d(rng));
  return img;
}

inline docforensics::Raster flat(int w, int h, std::uint8_t v) { return docforensics::Raster(w, h, v); }

/// Flat background plus rounded gaussian noise.
inline docforensics::Raster noisy(int w, int h, double base, double sigma, std::uint64_t seed) {
  docforensics::Raster img(w, h);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, sigma);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const auto v = docforensics::clamp_u8(base + n(rng));
      img.set_rgb(x, y, v, v, v);
    }
  return img;
}

struct IfdEntry {
  std::uint16_t tag;
  std::uint16_t type;  // 2 ASCII, 3 SHORT, 4 LONG
  std::string text;    // ASCII payload without the terminator
  std::uint32_t number = 0;
};

/// "Exif\0\0" + a TIFF structure with IFD0 = `ifd0` plus an Exif sub-IFD
/// holding `sub`, in the requested byte order.
inline Bytes exif_payload(bool big_endian, const std::vector<IfdEntry>& ifd0, const std::vector<IfdEntry>& sub) {
  Bytes t;
  auto put16 = [&](std::size_t at, std::uint16_t v) {
    if (big_endian) {
      t[at] = v >> 8, t[at + 1] = v & 0xFF;
    } else {
      t[at] = v & 0xFF, t[at + 1] = v >> 8;
    }
  };
  auto put32 = [&](std::size_t at, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) t[at + (big_endian ? 3 - i : i)] = static_cast<std::uint8_t>(v >> (8 * i));
  };
  const std::size_t n0 = ifd0.size() + 1;  // plus the sub-IFD pointer
  const std::size_t ifd0_at = 8, ifd0_len = 2 + 12 * n0 + 4;
  const std::size_t sub_at = ifd0_at + ifd0_len, sub_len = 2 + 12 * sub.size() + 4;
  std::size_t data_at = sub_at + sub_len;
  t.resize(data_at);
  t[0] = t[1] = big_endian ? 'M' : 'I';
  put16(2, 42);
  put32(4, static_cast<std::uint32_t>(ifd0_at));

  auto write_ifd = [&](std::size_t at, const std::vector<IfdEntry>& entries, bool with_pointer) {
    const std::size_t n = entries.size() + (with_pointer ? 1 : 0);
    put16(at, static_cast<std::uint16_t>(n));
    std::size_t e = at + 2;
    for (const auto& en : entries) {
      put16(e, en.tag);
      put16(e + 2, en.type);
      if (en.type == 2) {
        const auto len = static_cast<std::uint32_t>(en.text.size() + 1);
        put32(e + 4, len);
        if (len <= 4) {
          for (std::size_t i = 0; i < en.text.size(); ++i) t[e + 8 + i] = static_cast<std::uint8_t>(en.text[i]);
        } else {
          put32(e + 8, static_cast<std::uint32_t>(data_at));
          t.resize(data_at + len, 0);
          for (std::size_t i = 0; i < en.text.size(); ++i) t[data_at + i] = static_cast<std::uint8_t>(en.text[i]);
          data_at += len + (len & 1);
          t.resize(data_at, 0);
        }
      } else if (en.type == 3) {
        put32(e + 4, 1);
        put16(e + 8, static_cast<std::uint16_t>(en.number));
      } else {
        put32(e + 4, 1);
        put32(e + 8, en.number);
      }
      e += 12;
    }
    if (with_pointer) {
      put16(e, 0x8769);
      put16(e + 2, 4);
      put32(e + 4, 1);
      put32(e + 8, static_cast<std::uint32_t>(sub_at));
      e += 12;
    }
    put32(e, 0);
  };
  write_ifd(ifd0_at, ifd0, true);
  write_ifd(sub_at, sub, false);

  t.insert(t.begin(), {'E', 'x', 'i', 'f', 0, 0});
  return t;
}

inline std::vector<IfdEntry> camera_tags(const std::string& make) {
  return {{0x010F, 2, make}, {0x0110, 2, "EOS 5D"}, {0x0112, 3, "", 6}, {0x0131, 2, "fw 1.0.2"}};
}

inline Bytes jpeg_with(const docforensics::Raster& img, const std::vector<docforensics::io::AppSegment>& segs,
                       int quality = 90) {
  return docforensics::io::encode_jpeg(img, quality, segs);
}

inline docforensics::io::AppSegment text_segment(int marker, const std::string& text) {
  return {marker, Bytes(text.begin(), text.end())};
}

}  // namespace fixture
