#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "docforensics/bitmap_font.hpp"
#include "docforensics/errors.hpp"
#include "docforensics/localization.hpp"
#include "docforensics/tamper_synth.hpp"
#include "fixtures.hpp"

using namespace docforensics;
using namespace docforensics::localization;

namespace {

bool covered(const std::vector<Point>& origins, int P, int x, int y) {
  for (const auto& o : origins)
    if (x >= o.x && x < o.x + P && y >= o.y && y < o.y + P) return true;
  return false;
}

std::filesystem::path write_regions(const std::string& name, const std::vector<std::string>& lines) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream out(p);
  for (const auto& l : lines) out << l << "\n";
  return p;
}

}  // namespace

TEST_CASE("V0 on a PxP region at the origin is one patch at (0,0)") {
  const auto o = window_origins(200, 200, {0, 0, 64, 64}, CropStrategy::V0, {});
  REQUIRE(o.size() == 1);
  CHECK(o[0].x == 0);
  CHECK(o[0].y == 0);
}

TEST_CASE("V1 tiles a 2.5P-wide region with three windows at zero overlap") {
  const Region r{10, 20, 160, 30};
  const auto o = window_origins(400, 300, r, CropStrategy::V1, {64, 0.0});
  CHECK(o.size() == 3);
  for (int y = r.y; y < r.bottom(); ++y)
    for (int x = r.x; x < r.right(); ++x) REQUIRE(covered(o, 64, x, y));
}

TEST_CASE("V1 covers every pixel of random regions") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> side(128, 500), ov(0, 9);
  for (int t = 0; t < 300; ++t) {
    const int W = side(rng), H = side(rng);
    std::uniform_int_distribution<int> ux(0, W - 1), uy(0, H - 1);
    const int x = ux(rng), y = uy(rng);
    const Region r{x, y, std::uniform_int_distribution<int>(1, W - x)(rng), std::uniform_int_distribution<int>(1, H - y)(rng)};
    const CropParams cp{64, ov(rng) / 10.0};
    const auto o = window_origins(W, H, r, CropStrategy::V1, cp);
    for (const auto& p : o) {
      REQUIRE(p.x >= 0);
      REQUIRE(p.y >= 0);
      REQUIRE(p.x + 64 <= W);
      REQUIRE(p.y + 64 <= H);
    }
    for (int yy = r.y; yy < r.bottom(); yy += 3)
      for (int xx = r.x; xx < r.right(); xx += 3) REQUIRE(covered(o, 64, xx, yy));
    REQUIRE(covered(o, 64, r.right() - 1, r.bottom() - 1));
  }
}

TEST_CASE("V2 right-aligns the window with the region") {
  for (int right : {64, 100, 250, 300}) {
    const Region r{right - 40, 100, 40, 20};
    const auto o = window_origins(300, 200, r, CropStrategy::V2, {});
    REQUIRE(o.size() == 1);
    CHECK(o[0].x + 64 == std::min(r.right(), 300));
  }
}

TEST_CASE("V3 yields exactly one resized patch; V0-V2 copy pixels verbatim") {
  std::mt19937_64 rng(6);
  const auto img = fixture::random_raster(220, 180, rng);
  const Region r{30, 40, 150, 25};
  const auto v3 = crop_patches(img, r, CropStrategy::V3);
  REQUIRE(v3.size() == 1);
  CHECK(v3[0].pixels.width() == 64);
  CHECK(v3[0].pixels.height() == 64);
  for (auto s : {CropStrategy::V0, CropStrategy::V1, CropStrategy::V2}) {
    for (const auto& p : crop_patches(img, r, s)) {
      CHECK(p.pixels.width() == 64);
      for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x)
          for (int c = 0; c < 3; ++c) REQUIRE(p.pixels.at(x, y, c) == img.at(p.origin.x + x, p.origin.y + y, c));
    }
  }
}

TEST_CASE("crop_patches argument errors and small images") {
  std::mt19937_64 rng(7);
  const auto img = fixture::random_raster(50, 40, rng);
  CHECK_THROWS_AS(crop_patches(img, {0, 0, 0, 5}, CropStrategy::V1), DegenerateRegion);
  CHECK_THROWS_AS(crop_patches(img, {0, 0, 5, 5}, CropStrategy::V1, {8, 0.25}), InvalidArgument);
  const auto p = crop_patches(img, {5, 5, 10, 10}, CropStrategy::V1);
  REQUIRE(p.size() == 1);
  CHECK(p[0].pixels.width() == 64);
  CHECK(p[0].pixels.at(63, 63, 0) == img.at(49, 39, 0));
  CHECK_THROWS_AS(parse_strategy("V9"), InvalidArgument);
}

TEST_CASE("a five-glyph word is detected as one box") {
  Raster img(200, 80, 230);
  font::TextStyle style;
  const Region ink = font::draw_text(img, 20, 20, "A7Q3Z", style);
  const auto boxes = builtin_cc(img);
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0].x == ink.x);
  CHECK(boxes[0].y == ink.y);
  CHECK(boxes[0].right() == ink.right());
  CHECK(boxes[0].bottom() == ink.bottom());
  CHECK(boxes[0].score == doctest::Approx(1.0));
}

TEST_CASE("rendered document lines are found by the builtin detector") {
  const auto d = tamper_synth::render_document({}, 5);
  const auto boxes = builtin_cc(d.image);
  CHECK(boxes.size() >= d.lines.size());
  for (const auto& f : d.fields) {
    bool hit = false;
    for (const auto& b : boxes) hit = hit || iou(b, f) > 0.5;
    CHECK(hit);
  }
}

TEST_CASE("lower confidence thresholds give nested region sets") {
  CHECK(DensityMode::high().conf_threshold < DensityMode::low().conf_threshold);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::string> lines;
  for (int i = 0; i < 200; ++i) {
    lines.push_back("{\"x\":" + std::to_string(i % 20 * 10) + ",\"y\":" + std::to_string(i / 20 * 12) +
                    ",\"w\":9,\"h\":10,\"score\":" + std::to_string(u(rng)) + "}");
  }
  const auto path = write_regions("docforensics_regions.jsonl", lines);
  const RegionProvider prov{ProviderKind::external_file, path};
  const Raster img(256, 256, 200);
  auto key = [](const Region& r) { return std::to_string(r.x) + "," + std::to_string(r.y); };
  std::set<std::string> prev;
  for (double thr : {0.9, 0.45, 0.3, 0.2, 0.05}) {
    std::set<std::string> cur;
    for (const auto& r : detect_regions(img, prov, {Density::low, thr})) cur.insert(key(r));
    for (const auto& k : prev) REQUIRE(cur.count(k) == 1);
    prev = cur;
  }
  std::filesystem::remove(path);

  auto doc = tamper_synth::render_document({}, 9);
  const auto hi = detect_regions(doc.image, {}, DensityMode::high());
  const auto lo = detect_regions(doc.image, {}, DensityMode::low());
  CHECK(hi.size() >= lo.size());
}

TEST_CASE("provider and region-file errors") {
  CHECK_THROWS_AS(detect_regions(Raster(), {}, DensityMode::low()), EmptyImage);
  CHECK_THROWS_AS(detect_regions(Raster(10, 10, 0), {ProviderKind::external_file, ""}, DensityMode::low()),
                  ProviderUnavailable);
  CHECK_THROWS_AS(load_region_file("/nonexistent/regions.jsonl"), ProviderUnavailable);
  const auto bad = write_regions("docforensics_bad.jsonl", {"{\"x\":1,\"y\":1,\"w\":0,\"h\":3}"});
  CHECK_THROWS_AS(load_region_file(bad), InvalidArgument);
  const auto unlabeled = write_regions("docforensics_unlabeled.jsonl", {"{\"x\":1,\"y\":1,\"w\":4,\"h\":3}"});
  CHECK_NOTHROW(load_region_file(unlabeled));
  CHECK_THROWS_AS(load_region_file(unlabeled, true), InvalidArgument);
  std::filesystem::remove(bad);
  std::filesystem::remove(unlabeled);
}

TEST_CASE("audit point selection") {
  const std::vector<Region> regions = {{10, 10, 20, 10}, {100, 10, 20, 10}, {10, 100, 20, 10}};
  const auto table = select_audit_points(regions, DocKind::table, std::nullopt);
  CHECK(table.regions.size() == 3);
  CHECK_FALSE(table.warning);
  const auto loose = select_audit_points(regions, DocKind::document, std::nullopt);
  CHECK(loose.regions.size() == 3);
  CHECK(loose.warning);
  std::vector<Region> anchors = {{90, 0, 50, 30, "amount", 1.0}};
  const auto sel = select_audit_points(regions, DocKind::document, anchors);
  REQUIRE(sel.regions.size() == 1);
  CHECK(sel.regions[0].x == 100);
  CHECK(sel.regions[0].label == "amount");
}
