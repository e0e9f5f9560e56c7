#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "docforensics/net/model.hpp"
#include "docforensics/net/train.hpp"
#include "docforensics/pipeline.hpp"
#include "docforensics/tamper_synth.hpp"

namespace docforensics::config {

struct KeySpec {
  std::string name;
  std::string default_value;
  std::string help;
};

/// Every recognised key with its default, in documentation order.
const std::vector<KeySpec>& known_keys();

/// Flat key=value settings. Lines are `key = value`; blank lines and lines
/// starting with '#' are ignored. Unknown keys raise ConfigError.
class Settings {
 public:
  Settings();  // all defaults

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  /// Applies a config file's contents.
  void merge_text(const std::string& text, const std::string& origin);
  void merge_file(const std::filesystem::path& path);
  /// Applies "key=value" overrides.
  void merge_overrides(const std::vector<std::string>& overrides);

  const std::map<std::string, std::string>& values() const { return values_; }

  /// FNV-1a 64 over the sorted "key=value\n" lines, as 16 hex digits.
  std::string hash() const;

 private:
  std::map<std::string, std::string> values_;
};

/// File from `explicit_path` if given, else $DOCFORENSICS_CONFIG if set, then overrides.
Settings load_settings(const std::optional<std::filesystem::path>& explicit_path,
                       const std::vector<std::string>& overrides);

tamper_synth::CorpusConfig corpus_config(const Settings& s);
net::ModelConfig model_config(const Settings& s);
net::TrainParams train_params(const Settings& s);
pipeline::PipelineConfig pipeline_config(const Settings& s);

}  // namespace docforensics::config
