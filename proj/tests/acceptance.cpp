// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "docforensics/config.hpp"
#include "docforensics/errors.hpp"
#include "docforensics/forensic_ops.hpp"
#include "docforensics/image_io.hpp"
#include "docforensics/jpeg_meta.hpp"
#include "docforensics/localization.hpp"
#include "docforensics/net/grad_check.hpp"
#include "docforensics/net/train.hpp"
#include "docforensics/pipeline.hpp"
#include "docforensics/tamper_synth.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace docforensics;

namespace {

// Pinned tolerances and thresholds.
constexpr double kGradTolerance = 1e-4;
constexpr double kOracleTolerance = 1e-9;
constexpr double kParsevalTolerance = 1e-6;
constexpr int kOracleInstances = 100;
constexpr int kSpliceFixtures = 50;
constexpr double kElaRatio = 1.5;
constexpr double kElaFixtureShare = 0.80;
constexpr double kMinHeldoutAccuracy = 0.80;
constexpr int kGeometryTrials = 1000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

fs::path work_dir() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / "docforensics_acceptance";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------- 1

struct TableRow {
  const char* name;
  long tp, fp, fn, tn;
  const char* printed[3];  // accuracy, recall, precision as printed
};

int decimals(const std::string& s) {
  const auto dot = s.find('.');
  return dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
}

Outcome metric_arithmetic() {
  const std::vector<TableRow> rows = {
      {"dpv1", 93, 14, 182, 215, {"0.61", "0.338", "0.869"}},
      {"dpv2", 265, 45, 10, 184, {"0.8909", "0.964", "0.855"}},
      {"dpv2.1", 251, 36, 40, 582, {"0.9164", "0.863", "0.875"}},
      {"dpv2.2", 217, 72, 58, 157, {"0.7421", "0.789", "0.751"}},
      {"dpv2.3", 251, 76, 24, 153, {"0.8016", "0.913", "0.768"}},
      {"dpv3", 186, 44, 89, 185, {"0.7361", "0.676", "0.809"}},
      {"casia dpv1", 963, 187, 72, 1312, {"0.8974", "0.93", "0.836"}},
      {"casia dpv2", 884, 198, 141, 1301, {"0.8657", "0.862", "0.817"}},
      {"casia dpv3", 953, 187, 72, 1499, {"0.8974", "0.93", "0.836"}},
  };
  Outcome o;
  std::vector<std::string> errata;
  for (const auto& r : rows) {
    std::vector<pipeline::Prediction> preds;
    preds.insert(preds.end(), r.tp, {true, true});
    preds.insert(preds.end(), r.fp, {true, false});
    preds.insert(preds.end(), r.fn, {false, true});
    preds.insert(preds.end(), r.tn, {false, false});
    const auto m = pipeline::evaluate(preds);
    const double got[3] = {*m.accuracy, *m.recall, *m.precision};
    const double want[3] = {oracle::ratio4(r.tp + r.tn, r.tp + r.fp + r.fn + r.tn), oracle::ratio4(r.tp, r.tp + r.fn),
                            oracle::ratio4(r.tp, r.tp + r.fp)};
    const char* names[3] = {"accuracy", "recall", "precision"};
    for (int k = 0; k < 3; ++k) {
      if (std::round(got[k] * 1e4) / 1e4 != want[k]) {
        o.pass = false;
        o.detail += std::string(" ") + r.name + "." + names[k] + "=" + fmt("%.6f", got[k]);
      }
      const int d = decimals(r.printed[k]);
      const double scale = std::pow(10.0, d);
      if (std::abs(std::round(got[k] * scale) / scale - std::stod(r.printed[k])) > 0.5 / scale)
        errata.push_back(std::string(r.name) + "." + names[k] + " printed " + r.printed[k] + " vs " + fmt("%.4f", got[k]));
    }
  }
  o.detail = std::to_string(rows.size()) + " rows match exact fractions at 4 dp" + o.detail;
  if (!errata.empty()) {
    o.detail += "; printed cells inconsistent with their own counts:";
    for (const auto& e : errata) o.detail += " [" + e + "]";
  }
  return o;
}

// ---------------------------------------------------------------- 2

Outcome gradient_suite() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto rep = net::grad_check_all(seed);
    for (const auto& [name, l] : rep.layers) {
      if (l.skipped) continue;
      worst = std::max(worst, l.max_rel_error);
      if (!(l.max_rel_error < kGradTolerance) || l.checked == 0) {
        o.pass = false;
        o.detail += " " + name + "=" + fmt("%.3g", l.max_rel_error);
      }
    }
    if (!rep.layers.count("percentile_pool_tied") || !rep.layers.at("percentile_pool_tied").skipped) o.pass = false;
  }
  o.detail = "max rel err " + fmt("%.3g", worst) + " over 3 seeds (tol 1e-4)" + o.detail;
  return o;
}

// ---------------------------------------------------------------- 3

Outcome oracle_equivalence() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-1, 1);
  auto rand_t = [&](std::vector<int> shape) {
    net::Tensor<double> t(std::move(shape));
    for (auto& v : t.data) v = u(rng);
    return t;
  };
  double err_sc = 0, err_pp = 0, err_vlad = 0, err_dct = 0, err_parseval = 0, err_med = 0;
  for (int t = 0; t < kOracleInstances; ++t) {
    const auto f = rand_t({1 + t % 6, 2 + t % 3, 2 + t % 4});
    const auto sc = net::self_correlation(f);
    const auto sc_ref = oracle::self_correlation(f);
    for (std::size_t i = 0; i < sc.size(); ++i) err_sc = std::max(err_sc, std::abs(sc[i] - sc_ref[i]));

    const int N = 4 + t % 30, K = 1 + t % std::min(N, 8);
    const auto corr = rand_t({N, 3, 2});
    const auto pp = net::percentile_pool(corr, K);
    const auto pp_ref = oracle::percentile_pool(corr, K);
    for (std::size_t i = 0; i < pp.size(); ++i) err_pp = std::max(err_pp, std::abs(pp[i] - pp_ref[i]));

    const int D = 2 + t % 5, Kc = 1 + t % 4;
    const auto desc = rand_t({D, 2, 4});
    const auto centers = rand_t({Kc, D});
    std::vector<std::vector<double>> xs, cs;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) xs.push_back(oracle::descriptor(desc, i, j));
    for (int k = 0; k < Kc; ++k) cs.push_back({centers.data.begin() + k * D, centers.data.begin() + (k + 1) * D});
    const auto vl = net::netvlad(desc, centers, 10.0);
    const auto vl_ref = oracle::netvlad(xs, cs, 10.0);
    for (std::size_t i = 0; i < vl.size(); ++i) err_vlad = std::max(err_vlad, std::abs(vl[i] - vl_ref[i]));

    const auto img = fixture::random_raster(8 + t % 17, 8 + t % 11, rng);
    const auto grid = forensic_ops::block_dct(img);
    for (int by = 0; by < grid.blocks_y; ++by)
      for (int bx = 0; bx < grid.blocks_x; ++bx) {
        std::vector<double> px(64);
        double e_px = 0, e_c = 0;
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x) {
            px[y * 8 + x] = oracle::bt601(img, std::min(bx * 8 + x, img.width() - 1),
                                          std::min(by * 8 + y, img.height() - 1)) - 128.0;
            e_px += px[y * 8 + x] * px[y * 8 + x];
          }
        const auto ref = oracle::dct8x8(px);
        for (int i = 0; i < 64; ++i) {
          err_dct = std::max(err_dct, std::abs(grid.at(bx, by)[i] - ref[i]));
          e_c += grid.at(bx, by)[i] * grid.at(bx, by)[i];
        }
        if (e_px > 0) err_parseval = std::max(err_parseval, std::abs(e_px - e_c) / e_px);
      }

    const auto res = forensic_ops::noise_residual_raw(img, forensic_ops::MedianDenoiser{3});
    const auto res_ref = oracle::median_residual(img);
    for (std::size_t i = 0; i < res_ref.size(); ++i) err_med = std::max(err_med, std::abs(res.values()[i] - res_ref[i]));
  }
  Outcome o;
  o.pass = err_sc < kOracleTolerance && err_pp < kOracleTolerance && err_vlad < kOracleTolerance &&
           err_dct < kOracleTolerance && err_parseval < kParsevalTolerance && err_med < kOracleTolerance;
  o.detail = std::to_string(kOracleInstances) + " instances each; max abs err self_corr " + fmt("%.2g", err_sc) +
             ", perc_pool " + fmt("%.2g", err_pp) + ", netvlad " + fmt("%.2g", err_vlad) + ", block_dct " +
             fmt("%.2g", err_dct) + ", median residual " + fmt("%.2g", err_med) + "; Parseval rel " +
             fmt("%.2g", err_parseval);
  return o;
}

// ---------------------------------------------------------------- 4

Outcome ela_separability() {
  int separated = 0;
  double min_ratio = 1e9;
  for (int i = 0; i < kSpliceFixtures; ++i) {
    tamper_synth::DocumentStyle bg_style, donor_style;
    bg_style.jpeg_qualities = {90};
    donor_style.jpeg_qualities = {60};
    const auto bg = tamper_synth::render_document(bg_style, tamper_synth::mix_seed(4000, i));
    const auto donor = tamper_synth::render_document(donor_style, tamper_synth::mix_seed(5000, i));
    const Region& src = donor.fields.at(i % donor.fields.size());
    const Region& dst = bg.fields.at((i * 7 + 3) % bg.fields.size());
    const auto s = tamper_synth::splice(bg.image, donor.image, src, {dst.x, dst.y});
    const auto ela = forensic_ops::ela_difference(s.image, 90);
    double in = 0, out = 0;
    long n_in = 0, n_out = 0;
    for (std::size_t k = 0; k < ela.values().size(); ++k) {
      if (s.mask.values()[k] > 0.5) {
        in += ela.values()[k];
        ++n_in;
      } else {
        out += ela.values()[k];
        ++n_out;
      }
    }
    const double ratio = (in / n_in) / std::max(out / n_out, 1e-12);
    min_ratio = std::min(min_ratio, ratio);
    separated += ratio >= kElaRatio;
  }
  Outcome o;
  o.pass = separated >= kElaFixtureShare * kSpliceFixtures;
  o.detail = std::to_string(separated) + "/" + std::to_string(kSpliceFixtures) +
             " fixtures with in-mask/out-of-mask ELA >= 1.5 (need 80%); min ratio " + fmt("%.2f", min_ratio);
  return o;
}

// ---------------------------------------------------------------- 5

Outcome end_to_end() {
  const config::Settings settings;  // defaults: 200/200, seed 7, 20 epochs, batch 16, lr 0.01
  const auto corpus = work_dir() / "corpus";
  const auto rows = tamper_synth::generate_corpus(config::corpus_config(settings), corpus);
  const auto params = config::train_params(settings);
  const auto [train_rows, test_rows] = net::split_rows(rows, settings.get_double("train.split"), params.seed);

  double acc[2] = {0, 0};
  std::string detail;
  const char* variants[2] = {"dpv1", "dpv2"};
  for (int v = 0; v < 2; ++v) {
    config::Settings s = settings;
    s.set("model.variant", variants[v]);
    const auto mc = config::model_config(s);
    const auto t0 = std::chrono::steady_clock::now();
    const auto train_set = net::build_patch_dataset(corpus, train_rows, mc, params.seed);
    const auto test_set = net::build_patch_dataset(corpus, test_rows, mc, params.seed + 1);
    const auto result = net::train(net::init_model(mc, params.seed), train_set, params);
    const auto c = net::evaluate_patches(result.model, test_set);
    acc[v] = c.accuracy();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    detail += std::string(variants[v]) + " held-out acc " + fmt("%.4f", acc[v]) + " (tp/fp/fn/tn " +
              std::to_string(c.tp) + "/" + std::to_string(c.fp) + "/" + std::to_string(c.fn) + "/" +
              std::to_string(c.tn) + ", lr " + fmt("%g", mc.lr) + ", " + fmt("%.0f", secs) + " s); ";
  }
  Outcome o;
  o.pass = acc[1] >= kMinHeldoutAccuracy && acc[1] >= acc[0];
  o.detail = detail + "train/test rows " + std::to_string(train_rows.size()) + "/" + std::to_string(test_rows.size());
  return o;
}

// ---------------------------------------------------------------- 6

Outcome parser_fixtures() {
  using namespace jpeg_meta;
  std::mt19937_64 rng(606);
  const auto kws = default_keywords();
  int keyword_fixtures = 0, detected = 0, clean_hits = 0, exif_pairs = 0, exif_equal = 0, truncations = 0,
      clean_errors = 0;

  const std::vector<std::pair<int, std::string>> carriers = {
      {0xE1, "http://ns.adobe.com/xap/1.0/ <x:xmpmeta><xmp:CreatorTool>Adobe Photoshop CC 2019</xmp:CreatorTool>"},
      {0xED, "Photoshop 3.0"},
      {0xFE, "Created with GIMP"},
      {0xE2, "ICC_PROFILE Adobe RGB (1998)"},
      {0xEE, "Adobe"},
      {0xFE, "edited in photoshop express"},
      {0xE1, "GIMPGIMPGIMP"},
      {0xEC, "Ducky Adobe ImageReady"},
  };
  for (const auto& [marker, text] : carriers) {
    const auto img = fixture::random_raster(24 + keyword_fixtures * 4, 24, rng);
    const auto b = fixture::jpeg_with(img, {fixture::text_segment(marker, text)});
    const auto table = parse_segments(b);
    const auto hits = scan_keywords(b, kws, &table);
    ++keyword_fixtures;
    std::size_t expected = 0;
    for (const auto& kw : kws) expected += oracle::find_all(b, kw).size();
    if (expected > 0 && hits.size() == expected) ++detected;
  }
  {
    auto b = fixture::jpeg_with(fixture::random_raster(30, 30, rng), {});
    const std::string tail = "Photoshop";
    b.insert(b.end(), tail.begin(), tail.end());
    ++keyword_fixtures;
    const auto hits = scan_keywords(b, kws);
    if (hits.size() == 1 && hits[0].segment == "free") ++detected;
  }
  for (int i = 0; i < 20; ++i) {
    const auto b = fixture::jpeg_with(fixture::random_raster(16 + i, 20, rng), {}, 50 + 2 * i);
    clean_hits += static_cast<int>(scan_keywords(b, kws).size());
  }

  const std::vector<std::vector<fixture::IfdEntry>> tag_sets = {
      fixture::camera_tags("Canon"),
      fixture::camera_tags("NIKON CORPORATION"),
      {{0x0131, 2, "Adobe Photoshop 22.0 (Windows)"}, {0x0132, 2, "2021:05:06 07:08:09"}},
      {{0x0112, 3, "", 1}},
      {{0x010F, 2, "LG"}, {0x9999, 4, "", 123456}},
  };
  for (const auto& tags : tag_sets) {
    const std::vector<fixture::IfdEntry> sub = {{0xA002, 4, "", 1024}, {0xA003, 3, "", 768}};
    const auto img = fixture::random_raster(20, 20, rng);
    const auto mm = fixture::jpeg_with(img, {{0xE1, fixture::exif_payload(true, tags, sub)}});
    const auto ii = fixture::jpeg_with(img, {{0xE1, fixture::exif_payload(false, tags, sub)}});
    const auto a = extract_exif(parse_segments(mm), mm);
    const auto b = extract_exif(parse_segments(ii), ii);
    ++exif_pairs;
    bool same = a.present && b.present && !a.warning && !b.warning && a.records.size() == tags.size() + sub.size() &&
                a.records.size() == b.records.size();
    for (std::size_t k = 0; same && k < a.records.size(); ++k) same = a.records[k].same_content(b.records[k]);
    exif_equal += same;

    for (std::size_t n = 0; n < mm.size(); n += 5) {
      ++truncations;
      try {
        parse_segments(std::span(mm.data(), n));
      } catch (const MalformedJpeg&) {
        ++clean_errors;
      } catch (...) {
      }
    }
  }
  Outcome o;
  o.pass = detected == keyword_fixtures && clean_hits == 0 && exif_equal == exif_pairs && clean_errors == truncations;
  o.detail = "keyword fixtures " + std::to_string(detected) + "/" + std::to_string(keyword_fixtures) +
             ", clean-fixture hits " + std::to_string(clean_hits) + ", dual-endian EXIF " +
             std::to_string(exif_equal) + "/" + std::to_string(exif_pairs) + ", truncated streams rejected " +
             std::to_string(clean_errors) + "/" + std::to_string(truncations);
  return o;
}

// ---------------------------------------------------------------- 7

Outcome geometry_properties() {
  std::mt19937_64 rng(707);
  int uncovered = 0;
  for (int t = 0; t < kGeometryTrials; ++t) {
    const int W = std::uniform_int_distribution<int>(128, 480)(rng);
    const int H = std::uniform_int_distribution<int>(128, 360)(rng);
    const int x = std::uniform_int_distribution<int>(0, W - 1)(rng);
    const int y = std::uniform_int_distribution<int>(0, H - 1)(rng);
    const Region r{x, y, std::uniform_int_distribution<int>(1, W - x)(rng),
                   std::uniform_int_distribution<int>(1, H - y)(rng)};
    const localization::CropParams cp{std::uniform_int_distribution<int>(2, 8)(rng) * 16,
                                      std::uniform_int_distribution<int>(0, 9)(rng) / 10.0};
    if (cp.patch_size > std::min(W, H)) continue;
    std::vector<std::uint8_t> cov(static_cast<std::size_t>(W) * H, 0);
    for (const auto& o : localization::window_origins(W, H, r, localization::CropStrategy::V1, cp))
      for (int yy = o.y; yy < o.y + cp.patch_size; ++yy)
        for (int xx = o.x; xx < o.x + cp.patch_size; ++xx) cov[static_cast<std::size_t>(yy) * W + xx] = 1;
    for (int yy = r.y; yy < r.bottom(); ++yy)
      for (int xx = r.x; xx < r.right(); ++xx) uncovered += cov[static_cast<std::size_t>(yy) * W + xx] == 0;
  }

  // Density nesting: external scores and the builtin detector.
  int nesting_violations = 0;
  const auto path = work_dir() / "regions.jsonl";
  {
    std::ofstream out(path);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 500; ++i)
      out << "{\"x\":" << (i % 25) * 12 << ",\"y\":" << (i / 25) * 12 << ",\"w\":10,\"h\":10,\"score\":" << u(rng)
          << "}\n";
  }
  const auto key = [](const Region& r) { return std::to_string(r.x) + "," + std::to_string(r.y); };
  const Raster canvas(320, 260, 220);
  const localization::RegionProvider ext{localization::ProviderKind::external_file, path};
  for (const auto& prov : {ext, localization::RegionProvider{}}) {
    for (int d = 0; d < (prov.kind == localization::ProviderKind::builtin_cc ? 10 : 1); ++d) {
      const Raster img = prov.kind == localization::ProviderKind::builtin_cc
                             ? tamper_synth::make_sample(tamper_synth::CorpusConfig{}, 200 + d).image
                             : canvas;
      std::set<std::string> hi;
      for (const auto& r : localization::detect_regions(img, prov, localization::DensityMode::high())) hi.insert(key(r));
      for (const auto& r : localization::detect_regions(img, prov, localization::DensityMode::low()))
        nesting_violations += hi.count(key(r)) == 0;
    }
  }
  const bool ordered = localization::DensityMode::high().conf_threshold < localization::DensityMode::low().conf_threshold;

  int grade_violations = 0;
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < kGeometryTrials; ++t) {
    std::vector<double> s(1 + t % 9);
    for (auto& v : s) v = u(rng);
    const auto before = pipeline::grade_scores(s);
    for (std::size_t k = 0; k < s.size(); ++k) {
      auto raised = s;
      raised[k] = raised[k] + u(rng) * (1.0 - raised[k]);
      grade_violations += static_cast<int>(pipeline::grade_scores(raised)) < static_cast<int>(before);
    }
  }
  Outcome o;
  o.pass = uncovered == 0 && nesting_violations == 0 && ordered && grade_violations == 0;
  o.detail = "V1 uncovered pixels " + std::to_string(uncovered) + " over " + std::to_string(kGeometryTrials) +
             " regions; density 0.2/0.45 nesting violations " + std::to_string(nesting_violations) +
             "; grade monotonicity violations " + std::to_string(grade_violations) + " over " +
             std::to_string(kGeometryTrials) + " vectors";
  return o;
}

// ---------------------------------------------------------------- 8

struct Cmd {
  int code;
  std::string out;
};

Cmd sh(const std::string& args) {
  const std::string cmd = std::string(DOCFORENSICS_CLI) + " " + args + " 2>/dev/null";
  Cmd r{-1, ""};
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

bool same_tree(const fs::path& a, const fs::path& b, int& files) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (rel.size() != count_b) return false;
  for (const auto& r : rel) {
    if (!fs::exists(b / r) || io::read_file(a / r) != io::read_file(b / r)) return false;
    ++files;
  }
  return true;
}

Outcome determinism() {
  const auto d = work_dir() / "det";
  fs::create_directories(d);
  const std::string corpus_opts = " --set corpus.n_clean=30 --set corpus.n_tampered=30 --set seed=99";
  std::string why;
  int files = 0;

  const auto s1 = sh("synth --out " + (d / "c1").string() + corpus_opts);
  const auto s2 = sh("synth --out " + (d / "c2").string() + corpus_opts);
  const bool synth_ok = s1.code == 0 && s2.code == 0 && same_tree(d / "c1", d / "c2", files);
  if (!synth_ok) why += " synth differs;";

  bool train_ok = true, analyze_ok = true;
  for (const char* variant : {"dpv2", "dpv3"}) {
    const std::string v = variant;
    const std::string opts = " --variant " + v + " --set train.epochs=3 --set seed=99";
    const auto m1 = (d / ("m1." + v)).string(), m2 = (d / ("m2." + v)).string();
    const auto t1 = sh("train --corpus " + (d / "c1").string() + " --out " + m1 + opts);
    const auto t2 = sh("train --corpus " + (d / "c2").string() + " --out " + m2 + opts);
    const bool ok = t1.code == 0 && t2.code == 0 && io::read_file(m1) == io::read_file(m2) &&
                    io::read_file(m1 + ".loss.csv") == io::read_file(m2 + ".loss.csv");
    train_ok = train_ok && ok;
    if (!ok) why += " train " + v + " differs;";

    std::string inputs;
    for (const char* id : {"s00000", "s00031", "s00047"}) inputs += " " + (d / "c1" / "images" / id).string() + ".png";
    const auto a1 = sh("analyze" + inputs + " --model " + m1 + " --deterministic");
    const auto a2 = sh("analyze" + inputs + " --model " + m2 + " --deterministic");
    const auto o1 = d / ("o1." + v), o2 = d / ("o2." + v);
    const auto w1 = sh("analyze" + inputs + " --model " + m1 + " --deterministic --overlays --out " + o1.string());
    const auto w2 = sh("analyze" + inputs + " --model " + m1 + " --deterministic --overlays --out " + o2.string());
    int overlay_files = 0;
    const bool aok = a1.code == 0 && a2.code == 0 && !a1.out.empty() && a1.out == a2.out && w1.code == 0 &&
                     w2.code == 0 && same_tree(o1, o2, overlay_files) && overlay_files == 15;
    files += overlay_files;
    analyze_ok = analyze_ok && aok;
    if (!aok) why += " analyze " + v + " differs;";
  }
  Outcome o;
  o.pass = synth_ok && train_ok && analyze_ok;
  o.detail = "reruns byte-identical: synth " + std::string(synth_ok ? "yes" : "no") + ", train (dpv2, dpv3) " +
             (train_ok ? "yes" : "no") + ", analyze --deterministic " + (analyze_ok ? "yes" : "no") + "; " +
             std::to_string(files) + " files compared" + why;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric arithmetic", metric_arithmetic},   {"gradient suite", gradient_suite},
      {"oracle equivalence", oracle_equivalence}, {"ELA separability", ela_separability},
      {"end-to-end directional", end_to_end},      {"parser fixtures", parser_fixtures},
      {"coverage/geometry", geometry_properties},  {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  fs::remove_all(work_dir());
  return failed == 0 ? 0 : 1;
}
