#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "docforensics/net/layers.hpp"

namespace docforensics::net {

enum class Variant { dpv1, dpv2, dpv3 };
enum class Stream { rgb, ela, srm };
enum class Pooling { avgpool, selfcorr_percpool };
enum class Fusion { add, concat };
enum class Aggregator { none, vlad };

std::string to_string(Variant v);
std::string to_string(Stream s);
std::string to_string(Pooling p);
std::string to_string(Fusion f);
std::string to_string(Aggregator a);

int input_channels(Stream s);

struct ModelConfig {
  std::string name = "dpv2";  // table name, e.g. "dpv2.1"
  Variant variant = Variant::dpv2;
  std::vector<Stream> streams = {Stream::rgb, Stream::ela};
  Pooling pooling = Pooling::selfcorr_percpool;
  Fusion fusion = Fusion::concat;
  Aggregator aggregator = Aggregator::vlad;
  double lr = 0.00035;
  int k_clusters = 8;
  int k_percentiles = 8;
  double alpha = 10.0;
  int patch_size = 64;
  std::vector<int> widths = {8, 8};  // per stream: blocks use width, 2*width, 4*width channels
  int se_reduction = 4;

  std::vector<int> block_channels(std::size_t stream) const {
    const int w = widths.at(stream);
    return {w, 2 * w, 4 * w};
  }
  int feature_side() const { return patch_size / 8; }

  /// Throws ConfigMismatch when the invariants between variant, pooling,
  /// fusion, aggregator and streams do not hold, or sizes are unusable.
  void validate() const;
};

/// dpv1, dpv2, dpv2.1, dpv2.2, dpv2.3, dpv3. Throws ConfigMismatch.
ModelConfig make_config(const std::string& name);
std::vector<std::string> known_variants();

nlohmann::json to_json(const ModelConfig& c);
ModelConfig config_from_json(const nlohmann::json& j);

template <typename T>
using ParamMap = std::map<std::string, Tensor<T>>;

template <typename T>
ParamMap<T> cast_params(const ParamMap<float>& p) {
  ParamMap<T> out;
  for (const auto& [k, v] : p) out.emplace(k, v.template cast<T>());
  return out;
}

struct ModelState {
  ModelConfig config;
  ParamMap<float> params;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
};

/// Seeded He-style initialization.
ModelState init_model(const ModelConfig& config, std::uint64_t seed);

/// All intermediates of one forward pass, kept for backward and introspection.
template <typename T>
struct ForwardTrace {
  std::vector<Tensor<T>> inputs;
  std::vector<Tensor<T>> a1, a2, a3;  // per-stream block outputs (after ReLU)
  Tensor<T> fused_mid;                // concatenated block-2 outputs
  SeCache<T> se_cache;
  std::vector<Tensor<T>> a2_scaled;   // SE output split back per stream
  std::vector<Tensor<T>> pooled;      // avgpool vectors (dpv1)
  std::vector<Tensor<T>> corr, perc;  // self-correlation and percentile maps (dpv2/3)
  std::vector<std::vector<int>> perc_selected;
  Tensor<T> fused;                    // head input before aggregation
  Tensor<T> head_in;
  double logit = 0.0;
  double score = 0.0;
};

/// Inputs in config.streams order, each (channels, P, P). Throws ConfigMismatch.
template <typename T>
ForwardTrace<T> forward_trace(const ModelConfig& config, const ParamMap<T>& params, std::vector<Tensor<T>> inputs);

/// Accumulates dL/dparam into `grads` (same keys as params) for dL/dlogit = dlogit.
template <typename T>
void backward(const ModelConfig& config, const ParamMap<T>& params, const ForwardTrace<T>& trace, double dlogit,
              ParamMap<T>& grads);

/// Score in [0,1].
double forward(const ModelState& model, const std::vector<Tensor<float>>& inputs);

/// Named intermediate shapes of one forward pass.
std::map<std::string, std::vector<int>> introspect_shapes(const ModelState& model);

ParamMap<float> zeros_like(const ParamMap<float>& p);

}  // namespace docforensics::net
