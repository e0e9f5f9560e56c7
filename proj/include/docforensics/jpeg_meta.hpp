#pragma once

// JPEG container inspection: marker-segment table, a small EXIF decoder,
// raw keyword scanning and photo/scan/electronic source classification.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "docforensics/image.hpp"

namespace docforensics::jpeg_meta {

/// Pseudo marker for the entropy-coded bytes that follow an SOS header.
inline constexpr std::uint16_t kScanDataMarker = 0x0000;

/// One marker segment.
///
/// `offset` is the absolute position of the 0xFF byte of the marker and
/// `length` is the segment length field (it counts the two length bytes,
/// not the marker), or 0 for standalone markers (SOI, EOI, RSTn, TEM).
/// Scan-data entries have no marker: `offset` is the first entropy-coded
/// byte and `length` the number of bytes up to the next real marker.
struct SegmentEntry {
  std::uint16_t marker = 0;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;

  bool is_scan_data() const { return marker == kScanDataMarker; }
  /// Bytes occupied in the file, marker included.
  std::uint32_t extent() const { return is_scan_data() ? length : 2 + length; }
  std::uint32_t end() const { return offset + extent(); }
};

struct JpegSegmentTable {
  std::vector<SegmentEntry> entries;
  std::uint32_t total_size = 0;

  /// Entry whose byte range contains `offset`, if any.
  const SegmentEntry* find(std::uint32_t offset) const;
};

/// "SOI", "APP1", "DQT", "SOS", "SCAN", ... or "0xFFxx" for unnamed markers.
std::string marker_name(std::uint16_t marker);

/// Throws MalformedJpeg when SOI is missing, a length field is truncated or
/// points past the end, or the stream ends before EOI.
JpegSegmentTable parse_segments(std::span<const std::uint8_t> bytes);

enum class ByteOrder { big, little };

struct ExifRecord {
  std::uint16_t tag_id = 0;
  std::string name;  // "Make", "Model", "Software", "DateTime", "Orientation" or "unknown"
  std::variant<std::int64_t, std::string> value;
  ByteOrder byte_order = ByteOrder::big;

  /// Equality ignoring byte order.
  bool same_content(const ExifRecord& other) const {
    return tag_id == other.tag_id && name == other.name && value == other.value;
  }
};

struct ExifResult {
  std::vector<ExifRecord> records;
  bool present = false;   // an APP1 "Exif\0\0" segment exists
  bool warning = false;   // IFD structure was damaged; records are partial
};

/// Decodes IFD0 and the Exif sub-IFD of the first Exif APP1 segment.
/// IFD1 (thumbnail) and MakerNote are skipped.
ExifResult extract_exif(const JpegSegmentTable& table, std::span<const std::uint8_t> bytes);

std::string to_string(const std::variant<std::int64_t, std::string>& value);

struct KeywordHit {
  std::string keyword;
  std::uint32_t offset = 0;
  std::string segment;  // marker name, or "free" outside any segment
};

std::vector<std::string> default_keywords();

/// Reports every (possibly overlapping) occurrence of every keyword.
std::vector<KeywordHit> scan_keywords(std::span<const std::uint8_t> bytes,
                                      const std::vector<std::string>& keywords,
                                      const JpegSegmentTable* table = nullptr);

enum class SourceLabel { photo, scan, electronic };
std::string to_string(SourceLabel label);

struct SourceClass {
  SourceLabel label = SourceLabel::electronic;
  double noise_score = 0.0;
  bool has_camera_tags = false;
};

struct SourceThresholds {
  double electronic_max_noise = 0.5;  // residual variance, 8-bit units squared
  double background_fraction = 0.10;  // brightest share of pixels used as background
};

/// Residual variance over the brightest pixels, where the residual is
/// |luma - median3x3(luma)| in 8-bit units.
double background_noise_score(const Raster& image, double background_fraction = 0.10);

SourceLabel source_label(double noise_score, bool has_camera_tags, const SourceThresholds& t = {});

SourceClass classify_source(const Raster& image, const std::vector<ExifRecord>& exif,
                            const SourceThresholds& thresholds = {});

}  // namespace docforensics::jpeg_meta
