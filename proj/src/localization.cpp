#include "docforensics/localization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "docforensics/errors.hpp"

namespace docforensics::localization {

std::string to_string(Density d) { return d == Density::high ? "high" : "low"; }

std::string to_string(CropStrategy s) {
  switch (s) {
    case CropStrategy::V0: return "V0";
    case CropStrategy::V1: return "V1";
    case CropStrategy::V2: return "V2";
    case CropStrategy::V3: return "V3";
  }
  return "?";
}

CropStrategy parse_strategy(const std::string& s) {
  for (auto v : {CropStrategy::V0, CropStrategy::V1, CropStrategy::V2, CropStrategy::V3}) {
    if (to_string(v) == s) return v;
  }
  throw InvalidArgument("unknown crop strategy: " + s);
}

// ---------------------------------------------------------------- builtin detector

namespace {

struct Box {
  int x0, y0, x1, y1;  // inclusive
  double contrast = 0.0;  // summed (local mean - luma) over ink pixels
  int area = 0;
  int height() const { return y1 - y0 + 1; }
};

bool mergeable(const Box& a, const Box& b, const CcParams& p) {
  const int overlap = std::min(a.y1, b.y1) - std::max(a.y0, b.y0) + 1;
  if (overlap <= 0) return false;
  if (overlap < p.min_v_overlap * std::min(a.height(), b.height())) return false;
  const int gap = std::max(a.x0, b.x0) - std::min(a.x1, b.x1) - 1;
  return gap <= p.max_gap_ratio * std::max(a.height(), b.height());
}

}  // namespace

std::vector<Region> builtin_cc(const Raster& image, const CcParams& params) {
  const int W = image.width(), H = image.height();
  if (W == 0 || H == 0) return {};
  const GrayMap y = luma(image);

  // Summed-area table for the local mean.
  std::vector<double> sat(static_cast<std::size_t>(W + 1) * (H + 1), 0.0);
  auto S = [&](int x, int yy) -> double& { return sat[static_cast<std::size_t>(yy) * (W + 1) + x]; };
  for (int yy = 0; yy < H; ++yy)
    for (int x = 0; x < W; ++x) S(x + 1, yy + 1) = y.at(x, yy) + S(x, yy + 1) + S(x + 1, yy) - S(x, yy);

  const int r = params.window / 2;
  std::vector<std::uint8_t> ink(static_cast<std::size_t>(W) * H, 0);
  std::vector<double> depth(static_cast<std::size_t>(W) * H, 0.0);
  for (int yy = 0; yy < H; ++yy)
    for (int x = 0; x < W; ++x) {
      const int x0 = std::max(0, x - r), x1 = std::min(W, x + r + 1);
      const int y0 = std::max(0, yy - r), y1 = std::min(H, yy + r + 1);
      const double mean = (S(x1, y1) - S(x0, y1) - S(x1, y0) + S(x0, y0)) / ((x1 - x0) * (y1 - y0));
      ink[static_cast<std::size_t>(yy) * W + x] = y.at(x, yy) < mean - params.offset;
      depth[static_cast<std::size_t>(yy) * W + x] = mean - y.at(x, yy);
    }

  std::vector<Box> boxes;
  std::vector<int> stack;
  for (int start = 0; start < W * H; ++start) {
    if (ink[start] != 1) continue;
    Box b{start % W, start / W, start % W, start / W};
    ink[start] = 2;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      ++b.area;
      b.contrast += depth[p];
      const int px = p % W, py = p / W;
      b.x0 = std::min(b.x0, px);
      b.x1 = std::max(b.x1, px);
      b.y0 = std::min(b.y0, py);
      b.y1 = std::max(b.y1, py);
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = px + dx, ny = py + dy;
          if (nx < 0 || ny < 0 || nx >= W || ny >= H) continue;
          const int q = ny * W + nx;
          if (ink[q] == 1) {
            ink[q] = 2;
            stack.push_back(q);
          }
        }
    }
    if (b.area >= params.min_area) boxes.push_back(b);
  }

  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < boxes.size() && !changed; ++i)
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        if (!mergeable(boxes[i], boxes[j], params)) continue;
        boxes[i] = {std::min(boxes[i].x0, boxes[j].x0), std::min(boxes[i].y0, boxes[j].y0),
                    std::max(boxes[i].x1, boxes[j].x1), std::max(boxes[i].y1, boxes[j].y1),
                    boxes[i].contrast + boxes[j].contrast, boxes[i].area + boxes[j].area};
        boxes.erase(boxes.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
  }

  std::vector<Region> out;
  for (const auto& b : boxes) {
    const double score = std::min(1.0, b.contrast / b.area / params.full_contrast);
    out.push_back(Region{b.x0, b.y0, b.x1 - b.x0 + 1, b.y1 - b.y0 + 1, "", score});
  }
  std::sort(out.begin(), out.end(), [](const Region& a, const Region& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return out;
}

std::vector<Region> load_region_file(const std::filesystem::path& path, bool require_label) {
  std::ifstream in(path);
  if (!in) throw ProviderUnavailable("cannot read region file " + path.string());
  std::vector<Region> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Region r{j.at("x").get<int>(), j.at("y").get<int>(), j.at("w").get<int>(), j.at("h").get<int>()};
      r.score = j.value("score", 1.0);
      r.label = j.value("label", std::string{});
      if (require_label && r.label.empty()) throw InvalidArgument("missing label");
      if (r.w < 1 || r.h < 1) throw InvalidArgument("w and h must be >= 1");
      out.push_back(r);
    } catch (const std::exception& e) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<Region> detect_regions(const Raster& image, const RegionProvider& provider, const DensityMode& mode) {
  if (image.empty()) throw EmptyImage("detect_regions: empty image");
  if (provider.kind == ProviderKind::builtin_cc) {
    auto regions = builtin_cc(image);
    std::erase_if(regions, [&](const Region& r) { return r.score < mode.conf_threshold; });
    return regions;
  }
  if (provider.region_file.empty()) throw ProviderUnavailable("external_file provider without a region file");
  std::vector<Region> out;
  for (const auto& r : load_region_file(provider.region_file)) {
    if (r.score < mode.conf_threshold) continue;
    Region c = r.clamped_to(image.width(), image.height());
    if (c.w < 1 || c.h < 1) continue;
    out.push_back(c);
  }
  return out;
}

AuditSelection select_audit_points(const std::vector<Region>& regions, DocKind kind,
                                   const std::optional<std::vector<Region>>& template_anchors) {
  if (kind == DocKind::table) return {regions, false};
  if (!template_anchors || template_anchors->empty()) return {regions, true};
  AuditSelection sel;
  for (const auto& r : regions) {
    for (const auto& a : *template_anchors) {
      if (!a.contains(r.center_x(), r.center_y())) continue;
      Region kept = r;
      kept.label = a.label;
      sel.regions.push_back(kept);
      break;
    }
  }
  return sel;
}

// ---------------------------------------------------------------- cropping

namespace {

// Window starts along one axis covering [start, start+len) with windows of side P.
std::vector<int> axis_tiling(int start, int len, int limit, int P, int stride) {
  std::vector<int> pos;
  if (len <= P) {
    pos.push_back(start + (len - P) / 2);
  } else {
    const int n = (len - P + stride - 1) / stride + 1;
    for (int i = 0; i < n - 1; ++i) pos.push_back(start + i * stride);
    pos.push_back(start + len - P);
  }
  for (auto& p : pos) p = std::clamp(p, 0, std::max(0, limit - P));
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  return pos;
}

int centered(int start, int len, int limit, int P) {
  return std::clamp(start + (len - P) / 2, 0, std::max(0, limit - P));
}

Raster copy_window(const Raster& image, Point origin, int P) {
  Raster out(P, P);
  for (int y = 0; y < P; ++y) {
    const int sy = std::min(origin.y + y, image.height() - 1);
    for (int x = 0; x < P; ++x) {
      const int sx = std::min(origin.x + x, image.width() - 1);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = image.at(sx, sy, c);
    }
  }
  return out;
}

Region clamped_or_throw(const Region& region, int W, int H) {
  const Region r = region.clamped_to(W, H);
  if (r.w < 1 || r.h < 1) throw DegenerateRegion("region does not intersect the image");
  return r;
}

}  // namespace

std::vector<Point> window_origins(int W, int H, const Region& region, CropStrategy strategy, const CropParams& params) {
  const int P = params.patch_size;
  if (P < 16) throw InvalidArgument("patch size must be >= 16");
  if (!(params.overlap >= 0.0 && params.overlap < 1.0)) throw InvalidArgument("overlap must lie in [0, 1)");
  const Region r = clamped_or_throw(region, W, H);
  switch (strategy) {
    case CropStrategy::V0:
      return {Point{centered(r.x, r.w, W, P), centered(r.y, r.h, H, P)}};
    case CropStrategy::V1: {
      const int stride = std::max(1, static_cast<int>(std::floor(P * (1.0 - params.overlap))));
      std::vector<Point> out;
      for (int y : axis_tiling(r.y, r.h, H, P, stride))
        for (int x : axis_tiling(r.x, r.w, W, P, stride)) out.push_back({x, y});
      return out;
    }
    case CropStrategy::V2:
      return {Point{std::max(0, r.right() - P), centered(r.y, r.h, H, P)}};
    case CropStrategy::V3:
      return {Point{r.x, r.y}};
  }
  return {};
}

std::vector<Patch> crop_patches(const Raster& image, const Region& region, CropStrategy strategy,
                                const CropParams& params, int region_id) {
  const auto origins = window_origins(image.width(), image.height(), region, strategy, params);
  const int P = params.patch_size;
  std::vector<Patch> out;
  if (strategy == CropStrategy::V3) {
    const Region r = region.clamped_to(image.width(), image.height());
    out.push_back({resize_bilinear(crop(image, r), P, P), origins.front(), region_id, strategy});
    return out;
  }
  for (const auto& o : origins) out.push_back({copy_window(image, o, P), o, region_id, strategy});
  return out;
}

}  // namespace docforensics::localization
