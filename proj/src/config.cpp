#include "docforensics/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "docforensics/errors.hpp"

namespace docforensics::config {

const std::vector<KeySpec>& known_keys() {
  static const std::vector<KeySpec> keys = {
      {"seed", "7", "master seed for corpus generation, splits and initialization"},
      {"corpus.n_clean", "200", "number of clean samples"},
      {"corpus.n_tampered", "200", "number of tampered samples"},
      {"corpus.imbalance", "0", "when > 0, n_clean = round(imbalance * n_tampered)"},
      {"corpus.photometric_rate", "0.3", "share of clean samples given a brightness/contrast change"},
      {"corpus.donor_quality", "60", "JPEG quality of splice donor documents"},
      {"corpus.jpeg_quality", "90", "JPEG quality of the rendered documents' compression history"},
      {"corpus.width", "400", "rendered document width"},
      {"corpus.height", "300", "rendered document height"},
      {"corpus.op_mix", "splice:0.25,copy_move:0.15,erase:0.15,crop_noise_pasteback:0.2,char_stretch:0.25",
       "tamper op weights"},
      {"model.variant", "dpv2", "dpv1 | dpv2 | dpv2.1 | dpv2.2 | dpv2.3 | dpv3"},
      {"model.patch_size", "64", "patch side P"},
      {"model.k_clusters", "8", "NetVLAD clusters"},
      {"model.k_percentiles", "8", "percentile pooling channels"},
      {"model.alpha", "10", "NetVLAD soft-assignment sharpness"},
      {"train.lr", "0.01", "learning rate; empty uses the variant's built-in rate"},
      {"train.epochs", "20", "training epochs"},
      {"train.batch", "16", "minibatch size"},
      {"train.split", "0.8", "training share of the seeded stratified split"},
      {"prefilter.min_luma", "40", "minimum mean luma"},
      {"prefilter.max_luma", "235", "maximum mean luma"},
      {"prefilter.min_side", "128", "minimum of width and height"},
      {"evidence.tau_a", "0.15", "ELA summary above which an input is suspect"},
      {"evidence.tau_e", "0.5", "background noise variance below which an input is electronic"},
      {"evidence.background_fraction", "0.1", "brightest share of pixels used for the noise score"},
      {"evidence.ela_quality", "90", "ELA recompression quality"},
      {"evidence.keywords", "Photoshop,Adobe,GIMP,photoshop", "comma-separated editor keywords"},
      {"density.high", "0.2", "detector confidence threshold for suspect inputs"},
      {"density.low", "0.45", "detector confidence threshold for normal inputs"},
      {"grade.t_hi", "0.8", "region score for a tampered verdict"},
      {"grade.t_lo", "0.5", "region score for a suspected verdict"},
      {"localization.provider", "builtin_cc", "builtin_cc | external_file"},
      {"localization.region_file", "", "JSON-lines region file for the external_file provider"},
      {"localization.doc_kind", "table", "table | document"},
      {"localization.template_file", "", "JSON-lines anchors for document kind"},
      {"localization.strategy", "V1", "V0 | V1 | V2 | V3"},
      {"localization.overlap", "0.25", "V1 window overlap"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

}  // namespace

Settings::Settings() {
  for (const auto& k : known_keys()) values_[k.name] = k.default_value;
}

void Settings::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  it->second = value;
}

const std::string& Settings::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key: " + key);
  return it->second;
}

double Settings::get_double(const std::string& key) const {
  const auto& v = get(key);
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw ConfigError(key + ": not a number: '" + v + "'");
  return d;
}

int Settings::get_int(const std::string& key) const {
  const auto& v = get(key);
  char* end = nullptr;
  const long n = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw ConfigError(key + ": not an integer: '" + v + "'");
  return static_cast<int>(n);
}

std::uint64_t Settings::get_u64(const std::string& key) const {
  const auto& v = get(key);
  char* end = nullptr;
  const unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || v[0] == '-') throw ConfigError(key + ": not an unsigned integer: '" + v + "'");
  return n;
}

void Settings::merge_text(const std::string& text, const std::string& origin) {
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
}

void Settings::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  merge_text(ss.str(), path.string());
}

void Settings::merge_overrides(const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value: " + o);
    set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
  }
}

std::string Settings::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : values_) {
    for (unsigned char c : k + "=" + v + "\n") h = (h ^ c) * 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Settings load_settings(const std::optional<std::filesystem::path>& explicit_path,
                       const std::vector<std::string>& overrides) {
  Settings s;
  if (explicit_path) {
    s.merge_file(*explicit_path);
  } else if (const char* env = std::getenv("DOCFORENSICS_CONFIG"); env && *env) {
    s.merge_file(env);
  }
  s.merge_overrides(overrides);
  return s;
}

tamper_synth::CorpusConfig corpus_config(const Settings& s) {
  tamper_synth::CorpusConfig c;
  c.seed = s.get_u64("seed");
  c.n_clean = s.get_int("corpus.n_clean");
  c.n_tampered = s.get_int("corpus.n_tampered");
  c.imbalance = s.get_double("corpus.imbalance");
  c.photometric_rate = s.get_double("corpus.photometric_rate");
  c.donor_quality = s.get_int("corpus.donor_quality");
  c.style.jpeg_qualities = {s.get_int("corpus.jpeg_quality")};
  c.style.width = s.get_int("corpus.width");
  c.style.height = s.get_int("corpus.height");
  c.op_mix.clear();
  for (const auto& item : split(s.get("corpus.op_mix"), ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("corpus.op_mix entries must be op:weight");
    try {
      c.op_mix[tamper_synth::parse_op(trim(item.substr(0, colon)))] = std::stod(item.substr(colon + 1));
    } catch (const std::exception& e) {
      throw ConfigError("corpus.op_mix: " + std::string(e.what()));
    }
  }
  if (c.n_clean < 0 || c.n_tampered < 0) throw ConfigError("corpus counts must be non-negative");
  return c;
}

net::ModelConfig model_config(const Settings& s) {
  net::ModelConfig c;
  try {
    c = net::make_config(s.get("model.variant"));
  } catch (const ConfigMismatch& e) {
    throw ConfigError(e.what());
  }
  c.patch_size = s.get_int("model.patch_size");
  c.k_clusters = s.get_int("model.k_clusters");
  c.k_percentiles = s.get_int("model.k_percentiles");
  c.alpha = s.get_double("model.alpha");
  if (!s.get("train.lr").empty()) c.lr = s.get_double("train.lr");
  try {
    c.validate();
  } catch (const ConfigMismatch& e) {
    throw ConfigError(e.what());
  }
  return c;
}

net::TrainParams train_params(const Settings& s) {
  net::TrainParams p;
  if (!s.get("train.lr").empty()) p.lr = s.get_double("train.lr");
  p.epochs = s.get_int("train.epochs");
  p.batch = s.get_int("train.batch");
  p.seed = s.get_u64("seed");
  return p;
}

pipeline::PipelineConfig pipeline_config(const Settings& s) {
  pipeline::PipelineConfig c;
  c.prefilter = {s.get_double("prefilter.min_luma"), s.get_double("prefilter.max_luma"), s.get_int("prefilter.min_side")};
  c.evidence.ela_suspect = s.get_double("evidence.tau_a");
  c.evidence.source.electronic_max_noise = s.get_double("evidence.tau_e");
  c.evidence.source.background_fraction = s.get_double("evidence.background_fraction");
  c.evidence.ela_quality = s.get_int("evidence.ela_quality");
  c.evidence.keywords = split(s.get("evidence.keywords"), ',');
  c.density_high = s.get_double("density.high");
  c.density_low = s.get_double("density.low");
  if (!(c.density_high < c.density_low)) throw ConfigError("density.high must be below density.low");
  c.grade = {s.get_double("grade.t_hi"), s.get_double("grade.t_lo")};
  if (!(c.grade.t_lo <= c.grade.t_hi)) throw ConfigError("grade.t_lo must not exceed grade.t_hi");

  const auto& provider = s.get("localization.provider");
  if (provider == "builtin_cc") {
    c.provider.kind = localization::ProviderKind::builtin_cc;
  } else if (provider == "external_file") {
    c.provider.kind = localization::ProviderKind::external_file;
    c.provider.region_file = s.get("localization.region_file");
  } else {
    throw ConfigError("localization.provider must be builtin_cc or external_file");
  }
  const auto& kind = s.get("localization.doc_kind");
  if (kind != "table" && kind != "document") throw ConfigError("localization.doc_kind must be table or document");
  c.doc_kind = kind == "table" ? localization::DocKind::table : localization::DocKind::document;
  if (!s.get("localization.template_file").empty()) {
    c.template_anchors = localization::load_region_file(s.get("localization.template_file"), true);
  }
  try {
    c.strategy = localization::parse_strategy(s.get("localization.strategy"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
  c.overlap = s.get_double("localization.overlap");
  return c;
}

}  // namespace docforensics::config
