#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "docforensics/image.hpp"

namespace docforensics::localization {

enum class Density { high, low };

struct DensityMode {
  Density mode = Density::low;
  double conf_threshold = 0.45;

  static DensityMode high() { return {Density::high, 0.2}; }
  static DensityMode low() { return {Density::low, 0.45}; }
};

std::string to_string(Density d);

enum class ProviderKind { builtin_cc, external_file };

struct RegionProvider {
  ProviderKind kind = ProviderKind::builtin_cc;
  std::filesystem::path region_file;  // external_file only
};

/// Parameters of the connected-component text detector.
struct CcParams {
  int window = 15;             // adaptive-threshold window side
  double offset = 10.0;        // ink when luma < local mean - offset
  int min_area = 3;            // components smaller than this are noise
  double min_v_overlap = 0.5;  // vertical overlap / smaller height needed to merge
  double max_gap_ratio = 1.5;  // horizontal gap allowed, in units of the taller box's height
  double full_contrast = 64.0;  // mean ink depth below the local mean that scores 1.0
};

/// Text-line boxes from adaptive thresholding and 8-connected components.
/// Sorted top-to-bottom, then left-to-right. A box's score is its mean ink
/// depth below the local mean over full_contrast, capped at 1.
std::vector<Region> builtin_cc(const Raster& image, const CcParams& params = {});

/// Throws EmptyImage, ProviderUnavailable.
std::vector<Region> detect_regions(const Raster& image, const RegionProvider& provider, const DensityMode& mode);

/// JSON lines {x,y,w,h,score,label}; score defaults to 1, label to "".
/// With require_label, a missing label is an error. Throws ProviderUnavailable, InvalidArgument.
std::vector<Region> load_region_file(const std::filesystem::path& path, bool require_label = false);

enum class DocKind { document, table };

struct AuditSelection {
  std::vector<Region> regions;
  bool warning = false;  // document kind without a template: everything passed through
};

AuditSelection select_audit_points(const std::vector<Region>& regions, DocKind kind,
                                   const std::optional<std::vector<Region>>& template_anchors);

enum class CropStrategy { V0, V1, V2, V3 };

std::string to_string(CropStrategy s);
CropStrategy parse_strategy(const std::string& s);

struct Patch {
  Raster pixels;  // P x P
  Point origin;   // top-left of the window in source coordinates (V3: region origin)
  int region_id = 0;
  CropStrategy strategy = CropStrategy::V1;
};

struct CropParams {
  int patch_size = 64;
  double overlap = 0.25;  // V1 only, in [0, 1)
};

/// Window origins (top-left) crop_patches would use, without copying pixels.
std::vector<Point> window_origins(int image_w, int image_h, const Region& region, CropStrategy strategy,
                                  const CropParams& params);

/// V0-V2 copy source pixels verbatim (windows are shifted inside the image;
/// an image smaller than P is edge-replicated). V3 resizes bilinearly.
/// Throws DegenerateRegion, InvalidArgument (P < 16).
std::vector<Patch> crop_patches(const Raster& image, const Region& region, CropStrategy strategy,
                                const CropParams& params = {}, int region_id = 0);

}  // namespace docforensics::localization
