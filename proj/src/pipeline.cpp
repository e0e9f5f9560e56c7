#include "docforensics/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "docforensics/errors.hpp"
#include "docforensics/forensic_ops.hpp"
#include "docforensics/image_io.hpp"
#include "docforensics/net/train.hpp"

namespace docforensics::pipeline {

namespace fo = docforensics::forensic_ops;
namespace loc = docforensics::localization;

std::string to_string(RejectReason r) { return r == RejectReason::brightness ? "brightness" : "size"; }

std::string to_string(Branch b) {
  switch (b) {
    case Branch::suspect: return "suspect";
    case Branch::normal: return "normal";
    case Branch::excluded: return "excluded";
  }
  return "?";
}

std::string to_string(Grade g) {
  switch (g) {
    case Grade::untampered: return "untampered";
    case Grade::suspected: return "suspected";
    case Grade::tampered: return "tampered";
  }
  return "?";
}

PrefilterResult prefilter(const Raster& image, const PrefilterLimits& limits) {
  PrefilterResult r;
  if (!image.empty()) r.mean_luma = luma(image).mean();
  if (image.empty() || r.mean_luma < limits.min_luma || r.mean_luma > limits.max_luma)
    r.reasons.push_back(RejectReason::brightness);
  if (std::min(image.width(), image.height()) < limits.min_side) r.reasons.push_back(RejectReason::size);
  r.pass = r.reasons.empty();
  return r;
}

// ---------------------------------------------------------------- evidence

Branch decide_branch(jpeg_meta::SourceLabel source, std::size_t keyword_hits, double ela_summary,
                     double ela_suspect) {
  if (source == jpeg_meta::SourceLabel::electronic) return Branch::excluded;
  if (keyword_hits > 0 || ela_summary > ela_suspect) return Branch::suspect;
  return Branch::normal;
}

double top_percent_mean(const GrayMap& map, double fraction) {
  std::vector<double> v = map.values();
  if (v.empty()) return 0.0;
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(v.size()))));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n - 1), v.end(), std::greater<>());
  return std::accumulate(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / static_cast<double>(n);
}

Evidence feature_assist(const Raster& image, std::span<const std::uint8_t> bytes, const EvidenceThresholds& t) {
  Evidence e;
  std::vector<jpeg_meta::ExifRecord> exif;
  std::optional<jpeg_meta::JpegSegmentTable> table;
  if (io::looks_like_jpeg(bytes)) {
    try {
      table = jpeg_meta::parse_segments(bytes);
      auto result = jpeg_meta::extract_exif(*table, bytes);
      e.exif_present = result.present;
      exif = std::move(result.records);
    } catch (const MalformedJpeg& err) {
      e.parse_error = err.what();
      table.reset();
    }
  } else {
    e.parse_error = bytes.empty() ? "no file bytes" : "not a JPEG stream";
  }
  if (!bytes.empty()) e.keyword_hits = jpeg_meta::scan_keywords(bytes, t.keywords, table ? &*table : nullptr);
  e.source = jpeg_meta::classify_source(image, exif, t.source);
  e.ela_summary = top_percent_mean(fo::ela_difference(image, t.ela_quality));
  e.noise_summary = fo::noise_residual_raw(image, fo::MedianDenoiser{3}).mean() / 255.0;
  e.branch = decide_branch(e.source.label, e.keyword_hits.size(), e.ela_summary, t.ela_suspect);
  return e;
}

nlohmann::json to_json(const Evidence& e) {
  nlohmann::json hits = nlohmann::json::array();
  for (const auto& h : e.keyword_hits) hits.push_back({{"keyword", h.keyword}, {"offset", h.offset}, {"segment", h.segment}});
  nlohmann::json j = {{"exif_present", e.exif_present},
                      {"keyword_hits", hits},
                      {"source", {{"label", jpeg_meta::to_string(e.source.label)},
                                  {"noise_score", e.source.noise_score},
                                  {"has_camera_tags", e.source.has_camera_tags}}},
                      {"ela_summary", e.ela_summary},
                      {"noise_summary", e.noise_summary},
                      {"branch", to_string(e.branch)}};
  if (e.parse_error) j["parse_error"] = *e.parse_error;
  return j;
}

// ---------------------------------------------------------------- cascade

Grade grade_scores(const std::vector<double>& scores, const GradeThresholds& t) {
  const double top = scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
  if (top >= t.t_hi) return Grade::tampered;
  if (top >= t.t_lo) return Grade::suspected;
  return Grade::untampered;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Verdict run(const Raster& image, std::span<const std::uint8_t> bytes, const PipelineConfig& config,
            const net::ModelState& model) {
  Verdict v;
  v.model_variant = model.config.name;

  auto t0 = Clock::now();
  const auto pf = prefilter(image, config.prefilter);
  v.timings_ms["prefilter"] = ms_since(t0);
  if (!pf.pass) {
    std::string why;
    for (auto r : pf.reasons) why += (why.empty() ? "" : ",") + to_string(r);
    throw RejectedInput("rejected by prefilter: " + why);
  }

  t0 = Clock::now();
  v.evidence = feature_assist(image, bytes, config.evidence);
  v.timings_ms["feature_assist"] = ms_since(t0);
  if (v.evidence.branch == Branch::excluded) return v;

  t0 = Clock::now();
  const bool suspect = v.evidence.branch == Branch::suspect;
  const loc::DensityMode mode = suspect ? loc::DensityMode{loc::Density::high, config.density_high}
                                        : loc::DensityMode{loc::Density::low, config.density_low};
  v.density = mode.mode;
  const auto detected = loc::detect_regions(image, config.provider, mode);
  const auto selection = loc::select_audit_points(detected, config.doc_kind, config.template_anchors);
  v.audit_warning = selection.warning;
  v.timings_ms["localization"] = ms_since(t0);

  t0 = Clock::now();
  const auto& mc = model.config;
  const bool with_srm = std::find(mc.streams.begin(), mc.streams.end(), net::Stream::srm) != mc.streams.end();
  const auto sources = net::build_sources(image, with_srm);
  const loc::CropParams crop{mc.patch_size, config.overlap};
  std::vector<double> scores;
  for (std::size_t i = 0; i < selection.regions.size(); ++i) {
    const Region& region = selection.regions[i];
    RegionScore rs{region.clamped_to(image.width(), image.height()), 0.0, 0};
    rs.region.label = region.label;
    rs.region.score = region.score;
    if (config.strategy == loc::CropStrategy::V3) {
      // Resized patch: evidence planes are recomputed on the resampled pixels.
      const auto patch = loc::crop_patches(image, region, config.strategy, crop, static_cast<int>(i)).front();
      rs.score = net::forward(model, net::extract_inputs(net::build_sources(patch.pixels, with_srm), {0, 0}, mc));
      rs.patches = 1;
    } else {
      for (const auto& origin : loc::window_origins(image.width(), image.height(), region, config.strategy, crop)) {
        rs.score = std::max(rs.score, net::forward(model, net::extract_inputs(sources, origin, mc)));
        ++rs.patches;
      }
    }
    scores.push_back(rs.score);
    v.regions.push_back(rs);
  }
  v.grade = grade_scores(scores, config.grade);
  v.timings_ms["recognition"] = ms_since(t0);
  return v;
}

nlohmann::json to_json(const Verdict& v, const std::string& config_hash, bool deterministic) {
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : v.regions) {
    regions.push_back({{"box", {r.region.x, r.region.y, r.region.w, r.region.h}},
                       {"score", r.score},
                       {"confidence", r.region.score},
                       {"label", r.region.label},
                       {"patches", r.patches}});
  }
  nlohmann::json j = {{"grade", to_string(v.grade)},
                      {"regions", regions},
                      {"evidence", to_json(v.evidence)},
                      {"model", v.model_variant},
                      {"density", loc::to_string(v.density)},
                      {"audit_warning", v.audit_warning},
                      {"config_hash", config_hash}};
  if (!deterministic) j["timings_ms"] = v.timings_ms;
  return j;
}

// ---------------------------------------------------------------- evaluation

MetricsReport metrics_from_counts(long tp, long fp, long fn, long tn) {
  if (tp < 0 || fp < 0 || fn < 0 || tn < 0) throw InvalidArgument("confusion counts must be non-negative");
  MetricsReport m{tp, fp, fn, tn};
  auto ratio = [](long num, long den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(tp + tn, tp + fp + fn + tn);
  m.recall = ratio(tp, tp + fn);
  m.precision = ratio(tp, tp + fp);
  return m;
}

MetricsReport evaluate(const std::vector<Prediction>& predictions,
                       const std::optional<std::vector<RegionMatchInput>>& regions) {
  if (predictions.empty()) throw EmptyInput("evaluate: no predictions");
  long tp = 0, fp = 0, fn = 0, tn = 0;
  for (const auto& p : predictions) {
    if (p.predicted_tampered && p.truly_tampered) ++tp;
    else if (p.predicted_tampered) ++fp;
    else if (p.truly_tampered) ++fn;
    else ++tn;
  }
  MetricsReport m = metrics_from_counts(tp, fp, fn, tn);
  if (regions) m.region_f1 = region_f1(*regions);
  return m;
}

std::optional<double> region_f1(const std::vector<RegionMatchInput>& images, double iou_threshold) {
  long matched = 0, predicted = 0, truth = 0;
  for (const auto& img : images) {
    predicted += static_cast<long>(img.predicted.size());
    truth += static_cast<long>(img.truth.size());
    struct Pair {
      double iou;
      std::size_t p, t;
    };
    std::vector<Pair> pairs;
    for (std::size_t p = 0; p < img.predicted.size(); ++p)
      for (std::size_t t = 0; t < img.truth.size(); ++t) {
        const double v = iou(img.predicted[p], img.truth[t]);
        if (v >= iou_threshold) pairs.push_back({v, p, t});
      }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.iou > b.iou; });
    std::vector<bool> used_p(img.predicted.size()), used_t(img.truth.size());
    for (const auto& pr : pairs) {
      if (used_p[pr.p] || used_t[pr.t]) continue;
      used_p[pr.p] = used_t[pr.t] = true;
      ++matched;
    }
  }
  if (predicted + truth == 0) return std::nullopt;
  return 2.0 * matched / static_cast<double>(predicted + truth);
}

nlohmann::json to_json(const MetricsReport& m) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json { return v ? nlohmann::json(*v) : nlohmann::json(); };
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"fn", m.fn},
          {"tn", m.tn},
          {"accuracy", opt(m.accuracy)},
          {"recall", opt(m.recall)},
          {"precision", opt(m.precision)},
          {"region_f1", opt(m.region_f1)}};
}

}  // namespace docforensics::pipeline
