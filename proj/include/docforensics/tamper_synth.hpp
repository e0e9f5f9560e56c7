#pragma once

// Synthetic document rendering and tamper operations with pixel-accurate
// ground-truth masks.
//
// Augmentation catalogue coverage:
//   a  brightness/contrast           -> photometric (label stays clean)
//   b  text splice/delete/add/replace -> splice, erase, copy_move; replacement = erase then splice
//   c  change part of an amount       -> splice of digit glyphs from a donor document
//   d  erase leaving traces           -> erase with trace = true (ghost alpha 0.15)
//   e  direct erasure                 -> erase
//   f  obvious tampering              -> splice with a hard 1-px seam (no feathering)
//   g  cut and paste                  -> splice
//   h  crop, blur, re-noise, paste    -> crop_noise_pasteback
//   i  single-character stretch       -> char_stretch with factor in {0.8, 0.9, 1.1, 1.2}

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "docforensics/image.hpp"

namespace docforensics::tamper_synth {

enum class TamperOp { splice, copy_move, erase, crop_noise_pasteback, char_stretch, photometric };
enum class Label { clean, tampered };
enum class FillMode { background_median, flat };

std::string to_string(TamperOp op);
std::string to_string(Label label);
TamperOp parse_op(const std::string& name);

inline constexpr double kTraceAlpha = 0.15;
inline constexpr int kMedianRingWidth = 4;
inline constexpr std::array<double, 5> kStretchFactors = {0.8, 0.9, 1.0, 1.1, 1.2};

struct EraseFill {
  FillMode mode = FillMode::background_median;
  std::array<std::uint8_t, 3> color = {255, 255, 255};
  bool trace = false;
};

/// Op parameters. Only the fields relevant to `op` are meaningful.
struct TamperParams {
  std::vector<Region> regions;       // donor region (splice), source (copy_move), target otherwise
  std::optional<Point> destination;  // splice / copy_move
  double sigma = 0.0;                // crop_noise_pasteback blur
  double noise_sigma = 0.0;          // crop_noise_pasteback re-noise
  double factor = 1.0;               // char_stretch
  int brightness = 0;                // photometric
  double contrast = 1.0;             // photometric
  EraseFill fill;                    // erase
  bool erase_first = false;          // splice: erase destination before pasting (replacement)
  std::string donor;                 // splice: provenance of the donor image
};

struct TamperSpec {
  TamperOp op = TamperOp::photometric;
  TamperParams params;
  std::uint64_t seed = 0;
};

nlohmann::json to_json(const TamperSpec& spec);

struct LabeledSample {
  Raster image;
  GrayMap mask;  // 1 = tampered pixel
  TamperSpec spec;
  Label label = Label::clean;
};

/// Pastes donor_region of `donor` at `dst` in a copy of `src`. Throws OutOfBounds.
LabeledSample splice(const Raster& src, const Raster& donor, const Region& donor_region, Point dst);

/// Copies `from` to `to` within `src`, reading from a snapshot so overlaps behave.
LabeledSample copy_move(const Raster& src, const Region& from, Point to);

/// Fills the region. background_median uses the per-channel median of a
/// kMedianRingWidth-pixel ring around the region (clipped to the image).
/// With trace, pixels become round((1 - kTraceAlpha) * fill + kTraceAlpha * original).
LabeledSample erase(const Raster& src, const Region& region, const EraseFill& fill);

/// Gaussian-blurs the cropped region (edge replication inside the crop),
/// adds seeded gaussian noise and pastes it back.
LabeledSample crop_noise_pasteback(const Raster& src, const Region& region, double sigma, double noise_sigma,
                                   std::uint64_t seed);

/// Rescales region content horizontally by `factor` about the region centre
/// (bilinear); uncovered columns take the median colour of the region's
/// outer 1-px ring. factor must lie in [0.5, 2.0].
LabeledSample char_stretch(const Raster& src, const Region& region, double factor);

/// out = clamp(round(contrast * (in - 128) + 128 + brightness)); clean label.
/// brightness in [-64, 64], contrast in [0.5, 2].
LabeledSample photometric(const Raster& src, int brightness, double contrast);

// ---------------------------------------------------------------- documents

struct DocumentStyle {
  int width = 400;
  int height = 300;
  int scale = 2;
  int background_min = 222;
  int background_max = 234;
  double scan_noise_sigma = 3.0;
  std::vector<int> jpeg_qualities = {90};  // compression history; empty = none
};

struct RenderedDocument {
  Raster image;
  std::vector<Region> lines;   // whole text lines
  std::vector<Region> fields;  // value boxes labelled "date", "amount", ...
  std::vector<Region> glyphs;  // per-character ink boxes inside values, label = the character
  int jpeg_quality = 0;
};

RenderedDocument render_document(const DocumentStyle& style, std::uint64_t seed);

// ---------------------------------------------------------------- corpus

struct CorpusConfig {
  int n_clean = 200;
  int n_tampered = 200;
  double imbalance = 0.0;  // when > 0, n_clean = round(imbalance * n_tampered)
  std::uint64_t seed = 7;
  std::map<TamperOp, double> op_mix = {{TamperOp::splice, 0.25},
                                       {TamperOp::copy_move, 0.15},
                                       {TamperOp::erase, 0.15},
                                       {TamperOp::crop_noise_pasteback, 0.2},
                                       {TamperOp::char_stretch, 0.25}};
  double photometric_rate = 0.3;  // share of clean samples given a photometric change
  int donor_quality = 60;
  DocumentStyle style;

  int clean_count() const;
};

struct ManifestRow {
  std::string id;
  std::string path;       // relative to the corpus directory
  std::string mask_path;  // relative to the corpus directory
  Label label = Label::clean;
  TamperSpec spec;
};

nlohmann::json to_json(const ManifestRow& row);
ManifestRow manifest_row_from_json(const nlohmann::json& j);

/// Builds sample `index` (clean samples first, then tampered) deterministically.
LabeledSample make_sample(const CorpusConfig& config, int index);

/// Writes images/<id>.png, masks/<id>.png and manifest.jsonl under `out_dir`.
/// Throws IoError.
std::vector<ManifestRow> generate_corpus(const CorpusConfig& config, const std::filesystem::path& out_dir);

std::vector<ManifestRow> read_manifest(const std::filesystem::path& manifest_path);

/// Deterministic 64-bit mixing used to derive per-sample seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace docforensics::tamper_synth
