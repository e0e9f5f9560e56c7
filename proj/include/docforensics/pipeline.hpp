#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "docforensics/image.hpp"
#include "docforensics/jpeg_meta.hpp"
#include "docforensics/localization.hpp"
#include "docforensics/net/model.hpp"

namespace docforensics::pipeline {

// ---------------------------------------------------------------- prefilter

struct PrefilterLimits {
  double min_luma = 40.0;
  double max_luma = 235.0;
  int min_side = 128;
};

enum class RejectReason { brightness, size };
std::string to_string(RejectReason r);

struct PrefilterResult {
  bool pass = true;
  std::vector<RejectReason> reasons;
  double mean_luma = 0.0;
};

PrefilterResult prefilter(const Raster& image, const PrefilterLimits& limits = {});

// ---------------------------------------------------------------- evidence

enum class Branch { suspect, normal, excluded };
std::string to_string(Branch b);

struct EvidenceThresholds {
  double ela_suspect = 0.15;  // tau_a, on the top-1% mean of raw ELA
  jpeg_meta::SourceThresholds source;
  int ela_quality = 90;
  std::vector<std::string> keywords = jpeg_meta::default_keywords();
};

struct Evidence {
  bool exif_present = false;
  std::vector<jpeg_meta::KeywordHit> keyword_hits;
  jpeg_meta::SourceClass source;
  double ela_summary = 0.0;    // mean of the top 1% raw ELA values (fraction of 255)
  double noise_summary = 0.0;  // mean raw median-filter residual (fraction of 255)
  Branch branch = Branch::normal;
  std::optional<std::string> parse_error;  // set when the bytes were not a parseable JPEG
};

/// The branching rule on its own: excluded if electronic, suspect on any
/// keyword hit or ela_summary > tau_a, otherwise normal.
Branch decide_branch(jpeg_meta::SourceLabel source, std::size_t keyword_hits, double ela_summary,
                     double ela_suspect);

/// Mean of the largest ceil(1% of pixels) values.
double top_percent_mean(const GrayMap& map, double fraction = 0.01);

/// `bytes` are the original file bytes (may be empty); metadata parse
/// failures are recorded and evidence falls back to pixels.
Evidence feature_assist(const Raster& image, std::span<const std::uint8_t> bytes,
                        const EvidenceThresholds& thresholds = {});

nlohmann::json to_json(const Evidence& e);

// ---------------------------------------------------------------- cascade

enum class Grade { untampered, suspected, tampered };
std::string to_string(Grade g);

struct GradeThresholds {
  double t_hi = 0.8;
  double t_lo = 0.5;
};

Grade grade_scores(const std::vector<double>& region_scores, const GradeThresholds& t = {});

struct PipelineConfig {
  PrefilterLimits prefilter;
  EvidenceThresholds evidence;
  GradeThresholds grade;
  double density_high = 0.2;
  double density_low = 0.45;
  localization::RegionProvider provider;
  localization::DocKind doc_kind = localization::DocKind::table;
  std::optional<std::vector<Region>> template_anchors;
  localization::CropStrategy strategy = localization::CropStrategy::V1;
  double overlap = 0.25;
};

struct RegionScore {
  Region region;
  double score = 0.0;  // max over the region's patches
  int patches = 0;
};

struct Verdict {
  Grade grade = Grade::untampered;
  std::vector<RegionScore> regions;
  Evidence evidence;
  std::string model_variant;
  localization::Density density = localization::Density::low;
  bool audit_warning = false;
  std::map<std::string, double> timings_ms;
};

/// Throws RejectedInput when the prefilter fails.
Verdict run(const Raster& image, std::span<const std::uint8_t> bytes, const PipelineConfig& config,
            const net::ModelState& model);

/// Omits timings when deterministic is set.
nlohmann::json to_json(const Verdict& v, const std::string& config_hash, bool deterministic);

// ---------------------------------------------------------------- evaluation

struct Prediction {
  bool predicted_tampered = false;
  bool truly_tampered = false;
};

struct RegionMatchInput {
  std::vector<Region> predicted;
  std::vector<Region> truth;
};

struct MetricsReport {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  std::optional<double> accuracy, recall, precision;  // nullopt when the denominator is 0
  std::optional<double> region_f1;
};

MetricsReport metrics_from_counts(long tp, long fp, long fn, long tn);

/// Throws EmptyInput.
MetricsReport evaluate(const std::vector<Prediction>& predictions,
                       const std::optional<std::vector<RegionMatchInput>>& regions = std::nullopt);

/// Greedy one-to-one matching by descending IoU, pairs with IoU >= 0.5 count
/// as true positives. nullopt when there are no regions at all.
std::optional<double> region_f1(const std::vector<RegionMatchInput>& images, double iou_threshold = 0.5);

nlohmann::json to_json(const MetricsReport& m);

}  // namespace docforensics::pipeline
