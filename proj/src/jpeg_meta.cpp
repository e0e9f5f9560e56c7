#include "docforensics/jpeg_meta.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>

#include "docforensics/errors.hpp"
#include "docforensics/forensic_ops.hpp"

namespace docforensics::jpeg_meta {

namespace {

std::uint16_t be16(std::span<const std::uint8_t> b, std::size_t pos) {
  return static_cast<std::uint16_t>((b[pos] << 8) | b[pos + 1]);
}

bool is_standalone(std::uint8_t m) {
  return m == 0xD8 || m == 0xD9 || m == 0x01 || (m >= 0xD0 && m <= 0xD7);
}

}  // namespace

const SegmentEntry* JpegSegmentTable::find(std::uint32_t offset) const {
  for (const auto& e : entries) {
    if (offset >= e.offset && offset < e.end()) return &e;
  }
  return nullptr;
}

std::string marker_name(std::uint16_t marker) {
  if (marker == kScanDataMarker) return "SCAN";
  const std::uint8_t m = marker & 0xFF;
  if (m >= 0xE0 && m <= 0xEF) return "APP" + std::to_string(m - 0xE0);
  if (m >= 0xD0 && m <= 0xD7) return "RST" + std::to_string(m - 0xD0);
  switch (m) {
    case 0xD8: return "SOI";
    case 0xD9: return "EOI";
    case 0xDA: return "SOS";
    case 0xDB: return "DQT";
    case 0xC4: return "DHT";
    case 0xDD: return "DRI";
    case 0xFE: return "COM";
    case 0xC0: return "SOF0";
    case 0xC1: return "SOF1";
    case 0xC2: return "SOF2";
    default: break;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "0x%04X", marker);
  return buf;
}

JpegSegmentTable parse_segments(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw MalformedJpeg("empty input");
  if (bytes.size() < 2 || bytes[0] != 0xFF || bytes[1] != 0xD8) throw MalformedJpeg("missing SOI");
  JpegSegmentTable table;
  table.total_size = static_cast<std::uint32_t>(bytes.size());
  table.entries.push_back({0xFFD8, 0, 0});
  std::size_t pos = 2;
  const std::size_t n = bytes.size();

  while (true) {
    if (pos >= n) throw MalformedJpeg("end of stream before EOI");
    if (bytes[pos] != 0xFF) throw MalformedJpeg("expected marker at offset " + std::to_string(pos));
    while (pos + 1 < n && bytes[pos + 1] == 0xFF) ++pos;  // fill bytes
    if (pos + 1 >= n) throw MalformedJpeg("end of stream before EOI");
    const std::uint8_t m = bytes[pos + 1];
    const auto marker = static_cast<std::uint16_t>(0xFF00 | m);
    if (m == 0x00) throw MalformedJpeg("stuffed zero outside scan data");
    if (m == 0xD9) {
      table.entries.push_back({marker, static_cast<std::uint32_t>(pos), 0});
      return table;
    }
    if (is_standalone(m)) {
      table.entries.push_back({marker, static_cast<std::uint32_t>(pos), 0});
      pos += 2;
      continue;
    }
    if (pos + 4 > n) throw MalformedJpeg("truncated length field at offset " + std::to_string(pos));
    const std::uint16_t length = be16(bytes, pos + 2);
    if (length < 2) throw MalformedJpeg("invalid segment length at offset " + std::to_string(pos));
    if (pos + 2 + length > n) throw MalformedJpeg("segment runs past end at offset " + std::to_string(pos));
    table.entries.push_back({marker, static_cast<std::uint32_t>(pos), length});
    pos += 2 + length;

    if (m == 0xDA) {
      // Entropy-coded data runs until a marker that is neither a stuffed
      // zero nor a restart marker.
      const std::size_t start = pos;
      while (true) {
        if (pos + 1 >= n) throw MalformedJpeg("end of stream inside scan data");
        if (bytes[pos] == 0xFF) {
          const std::uint8_t next = bytes[pos + 1];
          if (next != 0x00 && next != 0xFF && !(next >= 0xD0 && next <= 0xD7)) break;
        }
        ++pos;
      }
      if (pos > start) {
        table.entries.push_back({kScanDataMarker, static_cast<std::uint32_t>(start),
                                 static_cast<std::uint32_t>(pos - start)});
      }
    }
  }
}

// ---------------------------------------------------------------- EXIF

std::string to_string(const std::variant<std::int64_t, std::string>& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

namespace {

constexpr std::uint16_t kExifIfdPointer = 0x8769;
constexpr std::uint16_t kGpsIfdPointer = 0x8825;
constexpr std::uint16_t kMakerNote = 0x927C;

std::string tag_name(std::uint16_t tag) {
  switch (tag) {
    case 0x010F: return "Make";
    case 0x0110: return "Model";
    case 0x0131: return "Software";
    case 0x0132: return "DateTime";
    case 0x0112: return "Orientation";
    default: return "unknown";
  }
}

int type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
    default: return 0;
  }
}

class TiffReader {
 public:
  TiffReader(std::span<const std::uint8_t> tiff, ByteOrder order) : tiff_(tiff), order_(order) {}

  bool has(std::size_t pos, std::size_t len) const { return pos <= tiff_.size() && len <= tiff_.size() - pos; }

  std::uint16_t u16(std::size_t pos) const {
    return order_ == ByteOrder::big ? static_cast<std::uint16_t>((tiff_[pos] << 8) | tiff_[pos + 1])
                                    : static_cast<std::uint16_t>((tiff_[pos + 1] << 8) | tiff_[pos]);
  }
  std::uint32_t u32(std::size_t pos) const {
    return order_ == ByteOrder::big
               ? (std::uint32_t{tiff_[pos]} << 24) | (std::uint32_t{tiff_[pos + 1]} << 16) |
                     (std::uint32_t{tiff_[pos + 2]} << 8) | tiff_[pos + 3]
               : (std::uint32_t{tiff_[pos + 3]} << 24) | (std::uint32_t{tiff_[pos + 2]} << 16) |
                     (std::uint32_t{tiff_[pos + 1]} << 8) | tiff_[pos];
  }
  std::uint8_t u8(std::size_t pos) const { return tiff_[pos]; }

 private:
  std::span<const std::uint8_t> tiff_;
  ByteOrder order_;
};

struct IfdWalker {
  const TiffReader& rd;
  ByteOrder order;
  ExifResult& result;
  std::set<std::uint32_t> visited;

  // Returns the offset of the next IFD (0 when none).
  std::uint32_t walk(std::uint32_t ifd, bool follow_exif) {
    if (!visited.insert(ifd).second || !rd.has(ifd, 2)) {
      result.warning = true;
      return 0;
    }
    const std::uint16_t count = rd.u16(ifd);
    if (!rd.has(ifd + 2, static_cast<std::size_t>(count) * 12 + 4)) {
      result.warning = true;
      return 0;
    }
    std::vector<std::uint32_t> sub_ifds;
    for (std::uint16_t i = 0; i < count; ++i) {
      const std::size_t e = ifd + 2 + static_cast<std::size_t>(i) * 12;
      const std::uint16_t tag = rd.u16(e);
      const std::uint16_t type = rd.u16(e + 2);
      const std::uint32_t n = rd.u32(e + 4);
      if (tag == kExifIfdPointer) {
        if (follow_exif) sub_ifds.push_back(rd.u32(e + 8));
        continue;
      }
      if (tag == kGpsIfdPointer || tag == kMakerNote) continue;
      const int size = type_size(type);
      ExifRecord rec;
      rec.tag_id = tag;
      rec.name = tag_name(tag);
      rec.byte_order = order;
      if (size == 0) {
        rec.value = "<type " + std::to_string(type) + ">";
        result.records.push_back(std::move(rec));
        continue;
      }
      const std::uint64_t bytes = static_cast<std::uint64_t>(size) * n;
      const std::size_t data = bytes <= 4 ? e + 8 : rd.u32(e + 8);
      if (bytes > 0xFFFF || !rd.has(data, static_cast<std::size_t>(bytes))) {
        result.warning = true;
        continue;
      }
      rec.value = decode_value(type, n, data);
      result.records.push_back(std::move(rec));
    }
    const std::uint32_t next = rd.u32(ifd + 2 + static_cast<std::size_t>(count) * 12);
    for (auto sub : sub_ifds) walk(sub, false);
    return next;
  }

  std::variant<std::int64_t, std::string> decode_value(std::uint16_t type, std::uint32_t n, std::size_t data) const {
    switch (type) {
      case 2: {  // ASCII, NUL-terminated
        std::string s;
        for (std::uint32_t i = 0; i < n && rd.u8(data + i) != 0; ++i) s.push_back(static_cast<char>(rd.u8(data + i)));
        return s;
      }
      case 7:
        return "<undefined " + std::to_string(n) + " bytes>";
      case 5:
      case 10: {
        std::string s;
        for (std::uint32_t i = 0; i < n; ++i) {
          if (i) s += ' ';
          const std::uint32_t num = rd.u32(data + i * 8), den = rd.u32(data + i * 8 + 4);
          if (type == 10) {
            s += std::to_string(static_cast<std::int32_t>(num)) + "/" + std::to_string(static_cast<std::int32_t>(den));
          } else {
            s += std::to_string(num) + "/" + std::to_string(den);
          }
        }
        return s;
      }
      default:
        break;
    }
    auto scalar = [&](std::uint32_t i) -> std::int64_t {
      switch (type) {
        case 1: return rd.u8(data + i);
        case 6: return static_cast<std::int8_t>(rd.u8(data + i));
        case 3: return rd.u16(data + i * 2);
        case 8: return static_cast<std::int16_t>(rd.u16(data + i * 2));
        case 4: return rd.u32(data + i * 4);
        case 9: return static_cast<std::int32_t>(rd.u32(data + i * 4));
        default: return 0;
      }
    };
    if (n == 1) return scalar(0);
    std::string s;
    for (std::uint32_t i = 0; i < n; ++i) {
      if (i) s += ' ';
      s += std::to_string(scalar(i));
    }
    return s;
  }
};

}  // namespace

ExifResult extract_exif(const JpegSegmentTable& table, std::span<const std::uint8_t> bytes) {
  ExifResult result;
  static constexpr std::uint8_t kExifId[6] = {'E', 'x', 'i', 'f', 0, 0};
  for (const auto& entry : table.entries) {
    if (entry.marker != 0xFFE1 || entry.end() > bytes.size() || entry.length < 2 + 6 + 8) continue;
    const auto payload = bytes.subspan(entry.offset + 4, entry.length - 2);
    if (!std::equal(kExifId, kExifId + 6, payload.begin())) continue;
    result.present = true;
    const auto tiff = payload.subspan(6);
    ByteOrder order;
    if (tiff[0] == 'I' && tiff[1] == 'I') {
      order = ByteOrder::little;
    } else if (tiff[0] == 'M' && tiff[1] == 'M') {
      order = ByteOrder::big;
    } else {
      result.warning = true;
      return result;
    }
    TiffReader rd(tiff, order);
    if (rd.u16(2) != 42) {
      result.warning = true;
      return result;
    }
    IfdWalker walker{rd, order, result, {}};
    walker.walk(rd.u32(4), true);  // IFD1 (thumbnail) is not followed
    return result;
  }
  return result;
}

// ---------------------------------------------------------------- keywords

std::vector<std::string> default_keywords() { return {"Photoshop", "Adobe", "GIMP", "photoshop"}; }

std::vector<KeywordHit> scan_keywords(std::span<const std::uint8_t> bytes, const std::vector<std::string>& keywords,
                                      const JpegSegmentTable* table) {
  struct Found {
    std::uint32_t offset;
    std::size_t keyword_index;
  };
  std::vector<Found> found;
  for (std::size_t k = 0; k < keywords.size(); ++k) {
    const auto& kw = keywords[k];
    if (kw.empty()) continue;
    const std::boyer_moore_horspool_searcher searcher(kw.begin(), kw.end());
    auto it = bytes.begin();
    while (true) {
      it = std::search(it, bytes.end(), searcher);
      if (it == bytes.end()) break;
      found.push_back({static_cast<std::uint32_t>(it - bytes.begin()), k});
      ++it;
    }
  }
  std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    return a.offset != b.offset ? a.offset < b.offset : a.keyword_index < b.keyword_index;
  });
  std::vector<KeywordHit> hits;
  hits.reserve(found.size());
  for (const auto& f : found) {
    KeywordHit hit{keywords[f.keyword_index], f.offset, "free"};
    if (table) {
      if (const auto* e = table->find(f.offset)) hit.segment = marker_name(e->marker);
    }
    hits.push_back(std::move(hit));
  }
  return hits;
}

// ---------------------------------------------------------------- source

std::string to_string(SourceLabel label) {
  switch (label) {
    case SourceLabel::photo: return "photo";
    case SourceLabel::scan: return "scan";
    case SourceLabel::electronic: return "electronic";
  }
  return "unknown";
}

double background_noise_score(const Raster& image, double background_fraction) {
  const GrayMap gray = luma(image);
  const GrayMap residual = forensic_ops::noise_residual_raw(image, forensic_ops::MedianDenoiser{3});
  std::vector<double> sorted = gray.values();
  const std::size_t n = sorted.size();
  const auto rank = static_cast<std::size_t>((1.0 - background_fraction) * static_cast<double>(n - 1));
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
  const double threshold = sorted[rank];

  double sum = 0.0, sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (gray.values()[i] < threshold) continue;
    const double r = residual.values()[i];
    sum += r;
    sum_sq += r * r;
    ++count;
  }
  const double mean = sum / count;
  return std::max(0.0, sum_sq / count - mean * mean);
}

SourceLabel source_label(double noise_score, bool has_camera_tags, const SourceThresholds& t) {
  if (noise_score < t.electronic_max_noise) return SourceLabel::electronic;
  return has_camera_tags ? SourceLabel::photo : SourceLabel::scan;
}

SourceClass classify_source(const Raster& image, const std::vector<ExifRecord>& exif,
                            const SourceThresholds& thresholds) {
  if (image.empty()) throw EmptyImage("classify_source on empty image");
  SourceClass sc;
  sc.noise_score = background_noise_score(image, thresholds.background_fraction);
  sc.has_camera_tags = std::any_of(exif.begin(), exif.end(), [](const ExifRecord& r) {
    return (r.name == "Make" || r.name == "Model") && !to_string(r.value).empty();
  });
  sc.label = source_label(sc.noise_score, sc.has_camera_tags, thresholds);
  return sc;
}

}  // namespace docforensics::jpeg_meta
