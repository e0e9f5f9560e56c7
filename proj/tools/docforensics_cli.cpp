// Command-line front end: analyze, synth, train, eval, inspect.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "docforensics/config.hpp"
#include "docforensics/errors.hpp"
#include "docforensics/forensic_ops.hpp"
#include "docforensics/image_io.hpp"
#include "docforensics/jpeg_meta.hpp"
#include "docforensics/net/model_io.hpp"
#include "docforensics/net/train.hpp"
#include "docforensics/pipeline.hpp"
#include "docforensics/tamper_synth.hpp"

namespace df = docforensics;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kRejected = 2,
  kModelError = 3,
  kUsage = 64,   // bad configuration or arguments
  kDataErr = 65  // empty or unusable input data
};

struct Common {
  std::optional<std::string> config_file;
  std::vector<std::string> overrides;
  bool deterministic = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config_file, "key=value config file (fallback: $DOCFORENSICS_CONFIG)");
  app->add_option("--set", c.overrides, "override a config key, key=value (repeatable)");
  app->add_flag("--deterministic", c.deterministic, "omit timings so reruns are byte-identical");
}

df::config::Settings settings_for(const Common& c) {
  std::optional<fs::path> path;
  if (c.config_file) path = *c.config_file;
  return df::config::load_settings(path, c.overrides);
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

std::string keys_help() {
  std::ostringstream os;
  os << "Config keys (key=value, defaults shown):\n";
  for (const auto& k : df::config::known_keys()) {
    os << "  " << k.name << " = " << k.default_value << "\n      " << k.help << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- analyze

void draw_box(df::Raster& img, const df::Region& r, std::array<std::uint8_t, 3> colour) {
  const df::Region c = r.clamped_to(img.width(), img.height());
  if (c.w < 1 || c.h < 1) return;
  for (int x = c.x; x < c.right(); ++x) {
    img.set_rgb(x, c.y, colour[0], colour[1], colour[2]);
    img.set_rgb(x, c.bottom() - 1, colour[0], colour[1], colour[2]);
  }
  for (int y = c.y; y < c.bottom(); ++y) {
    img.set_rgb(c.x, y, colour[0], colour[1], colour[2]);
    img.set_rgb(c.right() - 1, y, colour[0], colour[1], colour[2]);
  }
}

void write_overlays(const fs::path& out_dir, const std::string& stem, const df::Raster& image,
                    const df::pipeline::Verdict& v, const df::pipeline::PipelineConfig& cfg) {
  namespace fo = df::forensic_ops;
  df::io::write_file_atomic(out_dir / (stem + ".ela.png"),
                            df::io::encode_png_gray(fo::ela_map(image, cfg.evidence.ela_quality)));
  df::io::write_file_atomic(out_dir / (stem + ".noise.png"),
                            df::io::encode_png_gray(fo::noise_residual(image, fo::MedianDenoiser{3})));
  df::GrayMap dct(image.width(), image.height());
  try {
    const auto blocks = fo::dct_anomaly_map(fo::block_dct(image));
    for (int y = 0; y < image.height(); ++y)
      for (int x = 0; x < image.width(); ++x) dct.at(x, y) = blocks.at(x / 8, y / 8);
  } catch (const df::InvalidArgument&) {
    // too few blocks for a neighbourhood comparison: leave the map empty
  }
  df::io::write_file_atomic(out_dir / (stem + ".dct.png"), df::io::encode_png_gray(dct));
  df::Raster boxes = image;
  for (const auto& r : v.regions) {
    const std::array<std::uint8_t, 3> colour = r.score >= cfg.grade.t_hi   ? std::array<std::uint8_t, 3>{230, 20, 20}
                                               : r.score >= cfg.grade.t_lo ? std::array<std::uint8_t, 3>{240, 150, 0}
                                                                           : std::array<std::uint8_t, 3>{20, 170, 40};
    draw_box(boxes, r.region, colour);
  }
  df::io::write_file_atomic(out_dir / (stem + ".boxes.png"), df::io::encode_png(boxes));
}

struct AnalyzeArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string model;
  std::optional<std::string> out_dir;
  bool overlays = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const auto settings = settings_for(a.common);
  const auto cfg = df::config::pipeline_config(settings);
  df::net::ModelState model;
  try {
    model = df::net::load_model(a.model);
  } catch (const df::ModelLoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kModelError;
  }
  const fs::path out_dir = a.out_dir.value_or(".");
  int status = kOk;
  for (const auto& input : a.inputs) {
    try {
      const auto bytes = df::io::read_file(input);
      const auto image = df::io::decode_image(bytes);
      const auto verdict = df::pipeline::run(image, bytes, cfg, model);
      json j = df::pipeline::to_json(verdict, settings.hash(), a.common.deterministic);
      j["input"] = input;
      const std::string stem = fs::path(input).stem().string();
      if (a.out_dir) {
        df::io::write_text_atomic(out_dir / (stem + ".verdict.json"), j.dump(2) + "\n");
      } else {
        std::cout << j.dump() << '\n';
      }
      if (a.overlays) write_overlays(out_dir, stem, image, verdict, cfg);
    } catch (const df::RejectedInput& e) {
      std::cerr << input << ": " << e.what() << '\n';
      if (status == kOk) status = kRejected;
    } catch (const df::ConfigMismatch& e) {
      std::cerr << input << ": model error: " << e.what() << '\n';
      return kModelError;
    } catch (const df::Error& e) {
      std::cerr << input << ": " << e.what() << '\n';
      status = kFailure;
    }
  }
  return status;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Common& common, const std::string& out_dir) {
  const auto settings = settings_for(common);
  const auto cfg = df::config::corpus_config(settings);
  const auto rows = df::tamper_synth::generate_corpus(cfg, out_dir);
  long tampered = 0;
  for (const auto& r : rows) tampered += r.label == df::tamper_synth::Label::tampered;
  print_json({{"manifest", (fs::path(out_dir) / "manifest.jsonl").string()},
              {"samples", rows.size()},
              {"clean", static_cast<long>(rows.size()) - tampered},
              {"tampered", tampered},
              {"seed", cfg.seed},
              {"config_hash", settings.hash()}});
  return kOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string corpus;
  std::string out;
  std::optional<std::string> loss_csv;
  std::optional<std::string> variant;
};

int cmd_train(TrainArgs a) {
  if (a.variant) a.common.overrides.push_back("model.variant=" + *a.variant);
  const auto settings = settings_for(a.common);
  const auto mcfg = df::config::model_config(settings);
  const auto params = df::config::train_params(settings);
  const auto rows = df::tamper_synth::read_manifest(fs::path(a.corpus) / "manifest.jsonl");
  const auto [train_rows, test_rows] = df::net::split_rows(rows, settings.get_double("train.split"), params.seed);

  const auto train_set = df::net::build_patch_dataset(a.corpus, train_rows, mcfg, params.seed);
  df::net::TrainResult result;
  try {
    result = df::net::train(df::net::init_model(mcfg, params.seed), train_set, params);
  } catch (const df::EmptyCorpus& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kModelError;
  }
  df::net::save_model(result.model, a.out);
  const std::string loss_path = a.loss_csv.value_or(a.out + ".loss.csv");
  df::io::write_text_atomic(loss_path, df::net::loss_csv(result.epoch_loss));

  json report = {{"model", a.out},
                 {"variant", mcfg.name},
                 {"loss_csv", loss_path},
                 {"seed", params.seed},
                 {"lr", params.lr.value_or(mcfg.lr)},
                 {"epochs", params.epochs},
                 {"train_size", train_rows.size()},
                 {"test_size", test_rows.size()},
                 {"final_loss", result.epoch_loss.back()}};
  if (!test_rows.empty()) {
    const auto test_set = df::net::build_patch_dataset(a.corpus, test_rows, mcfg, params.seed + 1);
    const auto c = df::net::evaluate_patches(result.model, test_set);
    report["heldout"] = df::pipeline::to_json(df::pipeline::metrics_from_counts(c.tp, c.fp, c.fn, c.tn));
  }
  print_json(report);
  return kOk;
}

// ---------------------------------------------------------------- eval

bool positive(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>() >= 0.5;
  const auto s = v.get<std::string>();
  return s == "tampered" || s == "suspected";
}

std::vector<df::Region> boxes(const json& arr) {
  std::vector<df::Region> out;
  for (const auto& b : arr) {
    if (b.is_array()) out.push_back(df::Region{b.at(0), b.at(1), b.at(2), b.at(3)});
    else out.push_back(df::Region{b.at("x"), b.at("y"), b.at("w"), b.at("h")});
  }
  return out;
}

struct EvalArgs {
  std::optional<std::string> predictions;
  std::optional<std::string> truth;
  std::optional<std::string> counts;
};

int cmd_eval(const EvalArgs& a) {
  if (a.counts) {
    long tp, fp, fn, tn;
    char tail;
    if (std::sscanf(a.counts->c_str(), "%ld/%ld/%ld/%ld%c", &tp, &fp, &fn, &tn, &tail) != 4) {
      std::cerr << "error: --counts expects tp/fp/fn/tn\n";
      return kUsage;
    }
    print_json(df::pipeline::to_json(df::pipeline::metrics_from_counts(tp, fp, fn, tn)));
    return kOk;
  }
  if (!a.predictions) {
    std::cerr << "error: give --counts or a predictions file\n";
    return kUsage;
  }
  std::map<std::string, bool> truth_by_id;
  if (a.truth) {
    for (const auto& r : df::tamper_synth::read_manifest(*a.truth))
      truth_by_id[r.id] = r.label == df::tamper_synth::Label::tampered;
  }
  std::ifstream file;
  if (*a.predictions != "-") {
    file.open(*a.predictions);
    if (!file) {
      std::cerr << "error: cannot open " << *a.predictions << '\n';
      return kFailure;
    }
  }
  std::istream& in = *a.predictions == "-" ? std::cin : file;

  std::vector<df::pipeline::Prediction> preds;
  std::vector<df::pipeline::RegionMatchInput> regions;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  bool any_counts = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      if (j.contains("tp")) {
        any_counts = true;
        tp += j.at("tp").get<long>();
        fp += j.at("fp").get<long>();
        fn += j.at("fn").get<long>();
        tn += j.at("tn").get<long>();
        continue;
      }
      df::pipeline::Prediction p;
      p.predicted_tampered = positive(j.contains("grade") ? j.at("grade") : j.at("predicted"));
      if (j.contains("truth")) {
        p.truly_tampered = positive(j.at("truth"));
      } else {
        const auto it = truth_by_id.find(j.at("id").get<std::string>());
        if (it == truth_by_id.end()) throw std::runtime_error("no ground truth for id " + j.at("id").dump());
        p.truly_tampered = it->second;
      }
      preds.push_back(p);
      if (j.contains("pred_regions") || j.contains("true_regions")) {
        regions.push_back({boxes(j.value("pred_regions", json::array())), boxes(j.value("true_regions", json::array()))});
      }
    } catch (const std::exception& e) {
      std::cerr << "error: line " << lineno << ": " << e.what() << '\n';
      return kDataErr;
    }
  }
  if (preds.empty() && !any_counts) {
    std::cerr << "error: no predictions\n";
    return kDataErr;
  }
  for (const auto& p : preds) {
    if (p.predicted_tampered && p.truly_tampered) ++tp;
    else if (p.predicted_tampered) ++fp;
    else if (p.truly_tampered) ++fn;
    else ++tn;
  }
  auto report = df::pipeline::metrics_from_counts(tp, fp, fn, tn);
  if (!regions.empty()) report.region_f1 = df::pipeline::region_f1(regions);
  print_json(df::pipeline::to_json(report));
  return kOk;
}

// ---------------------------------------------------------------- inspect

int cmd_inspect(const Common& common, const std::string& path) {
  const auto settings = settings_for(common);
  const auto bytes = df::io::read_file(path);
  const auto table = df::jpeg_meta::parse_segments(bytes);
  json segments = json::array();
  for (const auto& e : table.entries) {
    segments.push_back({{"marker", e.marker},
                        {"name", df::jpeg_meta::marker_name(e.marker)},
                        {"offset", e.offset},
                        {"length", e.length}});
  }
  const auto exif = df::jpeg_meta::extract_exif(table, bytes);
  json records = json::array();
  for (const auto& r : exif.records) {
    records.push_back({{"tag", r.tag_id}, {"name", r.name}, {"value", df::jpeg_meta::to_string(r.value)}});
  }
  const auto cfg = df::config::pipeline_config(settings);
  json hits = json::array();
  for (const auto& h : df::jpeg_meta::scan_keywords(bytes, cfg.evidence.keywords, &table)) {
    hits.push_back({{"keyword", h.keyword}, {"offset", h.offset}, {"segment", h.segment}});
  }
  json source = nullptr;
  try {
    const auto image = df::io::decode_image(bytes);
    const auto sc = df::jpeg_meta::classify_source(image, exif.records, cfg.evidence.source);
    source = {{"label", df::jpeg_meta::to_string(sc.label)},
              {"noise_score", sc.noise_score},
              {"has_camera_tags", sc.has_camera_tags}};
  } catch (const df::Error&) {
    // structure parsed but pixels did not decode: report metadata only
  }
  print_json({{"path", path},
              {"total_size", table.total_size},
              {"segments", segments},
              {"exif", {{"present", exif.present}, {"warning", exif.warning}, {"records", records}}},
              {"hits", hits},
              {"source", source}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document forgery forensics: evidence maps, tamper recognition and synthetic corpora"};
  app.require_subcommand(1);
  app.footer(keys_help());

  AnalyzeArgs analyze;
  auto* a = app.add_subcommand("analyze", "grade one or more document images");
  add_common(a, analyze.common);
  a->add_option("inputs", analyze.inputs, "image files (JPEG or PNG)")->required();
  a->add_option("-m,--model", analyze.model, "model file from `train`")->required();
  a->add_option("-o,--out", analyze.out_dir, "write <stem>.verdict.json here instead of stdout");
  a->add_flag("--overlays", analyze.overlays, "also write ELA/noise/DCT heatmaps and a boxes PNG");

  Common synth_common;
  std::string synth_out;
  auto* s = app.add_subcommand("synth", "generate a synthetic tamper corpus");
  add_common(s, synth_common);
  s->add_option("-o,--out", synth_out, "corpus directory")->required();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "train a recognition model on a corpus");
  add_common(t, train.common);
  t->add_option("--corpus", train.corpus, "corpus directory containing manifest.jsonl")->required();
  t->add_option("-o,--out", train.out, "model file to write")->required();
  t->add_option("--loss-csv", train.loss_csv, "loss curve CSV (default: <out>.loss.csv)");
  t->add_option("--variant", train.variant, "dpv1 | dpv2 | dpv2.1 | dpv2.2 | dpv2.3 | dpv3");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "confusion metrics from predictions or counts");
  e->add_option("predictions", eval.predictions, "JSON-lines predictions ('-' for stdin)");
  e->add_option("--truth", eval.truth, "manifest.jsonl supplying ground truth by id");
  e->add_option("--counts", eval.counts, "tp/fp/fn/tn");

  Common inspect_common;
  std::string inspect_path;
  auto* i = app.add_subcommand("inspect", "dump JPEG segments, EXIF, keyword hits and source class");
  add_common(i, inspect_common);
  i->add_option("path", inspect_path, "JPEG file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*a) return cmd_analyze(analyze);
    if (*s) return cmd_synth(synth_common, synth_out);
    if (*t) return cmd_train(train);
    if (*e) return cmd_eval(eval);
    if (*i) return cmd_inspect(inspect_common, inspect_path);
  } catch (const df::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kUsage;
  } catch (const df::ModelLoadError& err) {
    std::cerr << "model error: " << err.what() << '\n';
    return kModelError;
  } catch (const df::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
