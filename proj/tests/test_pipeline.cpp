#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "docforensics/errors.hpp"
#include "docforensics/jpeg_codec.hpp"
#include "docforensics/pipeline.hpp"
#include "docforensics/tamper_synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace docforensics;
using namespace docforensics::pipeline;

namespace {

double oracle_ela_summary(const Raster& img) {
  const Raster rt = codec::jpeg_roundtrip(img, 90);
  std::vector<double> v;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double s = 0;
      for (int c = 0; c < 3; ++c) s += std::abs(img.at(x, y, c) - rt.at(x, y, c));
      v.push_back(s / 3.0 / 255.0);
    }
  std::sort(v.rbegin(), v.rend());
  const auto n = static_cast<std::size_t>(std::ceil(0.01 * v.size()));
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += v[i];
  return sum / n;
}

std::vector<std::uint8_t> png_bytes(const Raster& img) { return io::encode_png(img); }

}  // namespace

TEST_CASE("prefilter rejects on brightness and size") {
  const auto black = prefilter(fixture::flat(300, 300, 0));
  CHECK_FALSE(black.pass);
  CHECK(black.reasons == std::vector<RejectReason>{RejectReason::brightness});
  const auto tiny = prefilter(fixture::flat(64, 64, 200));
  CHECK(tiny.reasons == std::vector<RejectReason>{RejectReason::size});
  const auto both = prefilter(fixture::flat(64, 300, 250));
  CHECK(both.reasons.size() == 2);

  tamper_synth::DocumentStyle style;
  style.width = 800;
  style.height = 600;
  const auto doc = tamper_synth::render_document(style, 3).image;
  double sum = 0;
  for (int y = 0; y < doc.height(); ++y)
    for (int x = 0; x < doc.width(); ++x) sum += oracle::bt601(doc, x, y);
  const auto ok = prefilter(doc);
  CHECK(ok.pass);
  CHECK(ok.mean_luma == doctest::Approx(sum / (800.0 * 600.0)).epsilon(1e-9));
  CHECK(ok.mean_luma > 200);
  CHECK(ok.mean_luma < 235);
}

TEST_CASE("branch rule") {
  using jpeg_meta::SourceLabel;
  for (auto src : {SourceLabel::photo, SourceLabel::scan, SourceLabel::electronic})
    for (std::size_t hits : {0u, 1u, 3u})
      for (double ela : {0.0, 0.1, 0.15, 0.2}) {
        const Branch b = decide_branch(src, hits, ela, 0.15);
        const Branch want = src == SourceLabel::electronic     ? Branch::excluded
                            : hits > 0 || ela > 0.15 ? Branch::suspect
                                                               : Branch::normal;
        CHECK(b == want);
        CHECK(decide_branch(src, hits, ela, 0.15) == b);
      }
}

TEST_CASE("feature assist on fixtures") {
  const auto doc = tamper_synth::render_document({}, 12).image;
  const auto ps = fixture::jpeg_with(doc, {fixture::text_segment(0xE1, "<xmp>Adobe Photoshop 2021</xmp>")});
  const auto e1 = feature_assist(io::decode_image(ps), ps);
  CHECK(e1.keyword_hits.size() == 2);
  CHECK(e1.branch == Branch::suspect);
  CHECK_FALSE(e1.parse_error.has_value());

  const auto white = fixture::flat(200, 200, 255);
  const auto e2 = feature_assist(white, png_bytes(white));
  CHECK(e2.source.label == jpeg_meta::SourceLabel::electronic);
  CHECK(e2.branch == Branch::excluded);
  CHECK(e2.parse_error.has_value());

  const auto clean_png = png_bytes(doc);
  const auto e3 = feature_assist(doc, clean_png);
  CHECK(e3.branch == Branch::normal);
  CHECK(e3.source.label == jpeg_meta::SourceLabel::scan);
  CHECK(e3.keyword_hits.empty());
  CHECK(e3.ela_summary == doctest::Approx(oracle_ela_summary(doc)).epsilon(1e-12));
  const auto res = oracle::median_residual(doc);
  double mean = 0;
  for (double r : res) mean += r;
  mean /= res.size();
  CHECK(e3.noise_summary == doctest::Approx(mean / 255.0).epsilon(1e-9));

  std::vector<std::uint8_t> broken(ps.begin(), ps.begin() + 300);
  const auto e4 = feature_assist(doc, broken);
  CHECK(e4.parse_error.has_value());
  CHECK(e4.keyword_hits.size() == 2);  // raw scan still runs
}

TEST_CASE("grading examples and monotonicity") {
  CHECK(grade_scores({0.1, 0.2}) == Grade::untampered);
  CHECK(grade_scores({0.6}) == Grade::suspected);
  CHECK(grade_scores({0.3, 0.85}) == Grade::tampered);
  CHECK(grade_scores({}) == Grade::untampered);
  CHECK(grade_scores({0.8}) == Grade::tampered);
  CHECK(grade_scores({0.5}) == Grade::suspected);

  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> s(1 + t % 7);
    for (auto& v : s) v = u(rng);
    const Grade before = grade_scores(s);
    auto raised = s;
    raised[t % raised.size()] += u(rng) * (1.0 - raised[t % raised.size()]);
    REQUIRE(static_cast<int>(grade_scores(raised)) >= static_cast<int>(before));
  }
}

TEST_CASE("metrics from counts") {
  const auto m = metrics_from_counts(265, 45, 10, 184);
  CHECK(oracle::ratio4(265 + 184, 504) == 0.8909);
  CHECK(std::round(*m.accuracy * 1e4) / 1e4 == 0.8909);
  CHECK(std::round(*m.recall * 1e4) / 1e4 == 0.9636);
  CHECK(std::round(*m.precision * 1e4) / 1e4 == 0.8548);

  const auto none = metrics_from_counts(0, 0, 0, 5);
  CHECK(*none.accuracy == 1.0);
  CHECK_FALSE(none.recall.has_value());
  CHECK_FALSE(none.precision.has_value());
  CHECK(to_json(none)["recall"].is_null());
  CHECK_THROWS_AS(metrics_from_counts(-1, 0, 0, 0), InvalidArgument);

  std::vector<Prediction> all_right = {{true, true}, {false, false}, {true, true}};
  const auto r = evaluate(all_right);
  CHECK(*r.accuracy == 1.0);
  CHECK(*r.recall == 1.0);
  CHECK(*r.precision == 1.0);
  CHECK(r.tp == 2);
  CHECK(r.tn == 1);
  CHECK_THROWS_AS(evaluate({}), EmptyInput);
}

TEST_CASE("region F1 with greedy IoU matching") {
  std::vector<RegionMatchInput> imgs = {
      {{{0, 0, 10, 10}, {50, 50, 10, 10}}, {{1, 1, 10, 10}}},
      {{}, {{0, 0, 5, 5}}},
  };
  // one match, 2 predicted + 2 true
  CHECK(*region_f1(imgs) == doctest::Approx(0.5));
  CHECK_FALSE(region_f1({{{}, {}}}).has_value());
  std::vector<RegionMatchInput> loose = {{{{0, 0, 10, 10}}, {{6, 0, 10, 10}}}};
  CHECK(*region_f1(loose) == 0.0);
  const auto m = evaluate({{true, true}}, imgs);
  CHECK(m.region_f1.has_value());
}

TEST_CASE("run: reject, exclude, score and serialize") {
  auto cfg = net::make_config("dpv2");
  const auto model = net::init_model(cfg, 1);
  const PipelineConfig pc;
  CHECK_THROWS_AS(run(fixture::flat(300, 300, 0), {}, pc, model), RejectedInput);

  const auto white = fixture::flat(200, 200, 230);
  const auto ex = run(white, {}, pc, model);
  CHECK(ex.evidence.branch == Branch::excluded);
  CHECK(ex.grade == Grade::untampered);
  CHECK(ex.regions.empty());

  const auto doc = tamper_synth::render_document({}, 4).image;
  const auto bytes = png_bytes(doc);
  const auto v = run(doc, bytes, pc, model);
  CHECK_FALSE(v.regions.empty());
  CHECK(v.model_variant == "dpv2");
  std::vector<double> scores;
  for (const auto& r : v.regions) {
    CHECK(r.patches >= 1);
    CHECK(r.score >= 0.0);
    CHECK(r.score <= 1.0);
    scores.push_back(r.score);
  }
  CHECK(v.grade == grade_scores(scores, pc.grade));
  const auto a = to_json(v, "abc", true).dump();
  const auto b = to_json(run(doc, bytes, pc, model), "abc", true).dump();
  CHECK(a == b);
  CHECK(a.find("timings_ms") == std::string::npos);
  CHECK(to_json(v, "abc", false).contains("timings_ms"));

  PipelineConfig v3 = pc;
  v3.strategy = localization::CropStrategy::V3;
  for (const auto& r : run(doc, bytes, v3, model).regions) CHECK(r.patches == 1);
}
