#include "docforensics/net/model.hpp"

#include <cmath>
#include <random>

namespace docforensics::net {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::dpv1: return "dpv1";
    case Variant::dpv2: return "dpv2";
    case Variant::dpv3: return "dpv3";
  }
  return "?";
}
std::string to_string(Stream s) {
  switch (s) {
    case Stream::rgb: return "rgb";
    case Stream::ela: return "ela";
    case Stream::srm: return "srm";
  }
  return "?";
}
std::string to_string(Pooling p) { return p == Pooling::avgpool ? "avgpool" : "selfcorr_percpool"; }
std::string to_string(Fusion f) { return f == Fusion::add ? "add" : "concat"; }
std::string to_string(Aggregator a) { return a == Aggregator::none ? "none" : "vlad"; }

int input_channels(Stream s) { return s == Stream::ela ? 1 : 3; }

void ModelConfig::validate() const {
  auto fail = [&](const std::string& why) { throw ConfigMismatch("model config " + name + ": " + why); };
  const bool two = streams == std::vector<Stream>{Stream::rgb, Stream::ela};
  const bool three = streams == std::vector<Stream>{Stream::rgb, Stream::ela, Stream::srm};
  switch (variant) {
    case Variant::dpv1:
      if (pooling != Pooling::avgpool || fusion != Fusion::add || aggregator != Aggregator::none || !two)
        fail("dpv1 requires avgpool, add, no aggregator and rgb+ela streams");
      break;
    case Variant::dpv2:
      if (pooling != Pooling::selfcorr_percpool || fusion != Fusion::concat || aggregator != Aggregator::vlad || !two)
        fail("dpv2 requires selfcorr_percpool, concat, vlad and rgb+ela streams");
      break;
    case Variant::dpv3:
      if (pooling != Pooling::selfcorr_percpool || fusion != Fusion::concat || aggregator != Aggregator::vlad || !three)
        fail("dpv3 requires the dpv2 head and rgb+ela+srm streams");
      break;
  }
  if (widths.size() != streams.size()) fail("one width per stream required");
  for (int w : widths)
    if (w < 1) fail("widths must be positive");
  if (patch_size < 16 || patch_size % 8 != 0) fail("patch size must be a multiple of 8 and >= 16");
  int mid = 0;
  for (std::size_t s = 0; s < streams.size(); ++s) mid += block_channels(s)[1];
  if (se_reduction < 1 || mid % se_reduction != 0) fail("SE reduction must divide the fused channel count");
  if (fusion == Fusion::add) {
    for (std::size_t s = 1; s < streams.size(); ++s)
      if (widths[s] != widths[0]) fail("add fusion needs equal stream widths");
  }
  if (pooling == Pooling::selfcorr_percpool) {
    const int N = feature_side() * feature_side();
    if (k_percentiles < 1 || k_percentiles > N) fail("k_percentiles must lie in [1, N]");
    if (k_clusters < 1) fail("k_clusters must be >= 1");
    if (!(alpha > 0)) fail("alpha must be positive");
  }
  if (!(lr > 0)) fail("lr must be positive");
}

ModelConfig make_config(const std::string& name) {
  ModelConfig c;
  c.name = name;
  if (name == "dpv1") {
    c.variant = Variant::dpv1;
    c.pooling = Pooling::avgpool;
    c.fusion = Fusion::add;
    c.aggregator = Aggregator::none;
  } else if (name == "dpv2") {
  } else if (name == "dpv2.1") {
    c.lr = 3e-4;
  } else if (name == "dpv2.2") {
    c.widths = {16, 8};
  } else if (name == "dpv2.3") {
    c.lr = 3e-4;
    c.widths = {16, 16};
  } else if (name == "dpv3") {
    c.variant = Variant::dpv3;
    c.streams = {Stream::rgb, Stream::ela, Stream::srm};
    c.widths = {8, 8, 8};
  } else {
    throw ConfigMismatch("unknown model variant: " + name);
  }
  return c;
}

std::vector<std::string> known_variants() { return {"dpv1", "dpv2", "dpv2.1", "dpv2.2", "dpv2.3", "dpv3"}; }

nlohmann::json to_json(const ModelConfig& c) {
  std::vector<std::string> streams;
  for (auto s : c.streams) streams.push_back(to_string(s));
  return {{"name", c.name},
          {"variant", to_string(c.variant)},
          {"streams", streams},
          {"pooling", to_string(c.pooling)},
          {"fusion", to_string(c.fusion)},
          {"aggregator", to_string(c.aggregator)},
          {"lr", c.lr},
          {"k_clusters", c.k_clusters},
          {"k_percentiles", c.k_percentiles},
          {"alpha", c.alpha},
          {"patch_size", c.patch_size},
          {"widths", c.widths},
          {"se_reduction", c.se_reduction}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  try {
    ModelConfig c = make_config(j.at("name").get<std::string>());
    c.streams.clear();
    for (const auto& s : j.at("streams")) {
      const auto v = s.get<std::string>();
      c.streams.push_back(v == "rgb" ? Stream::rgb : v == "ela" ? Stream::ela : Stream::srm);
    }
    const auto variant = j.at("variant").get<std::string>();
    c.variant = variant == "dpv1" ? Variant::dpv1 : variant == "dpv3" ? Variant::dpv3 : Variant::dpv2;
    c.pooling = j.at("pooling") == "avgpool" ? Pooling::avgpool : Pooling::selfcorr_percpool;
    c.fusion = j.at("fusion") == "add" ? Fusion::add : Fusion::concat;
    c.aggregator = j.at("aggregator") == "none" ? Aggregator::none : Aggregator::vlad;
    c.lr = j.at("lr").get<double>();
    c.k_clusters = j.at("k_clusters").get<int>();
    c.k_percentiles = j.at("k_percentiles").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.patch_size = j.at("patch_size").get<int>();
    c.widths = j.at("widths").get<std::vector<int>>();
    c.se_reduction = j.at("se_reduction").get<int>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigMismatch(std::string("bad model config: ") + e.what());
  }
}

namespace {

std::string key(const ModelConfig& c, std::size_t s, const char* rest) { return to_string(c.streams[s]) + "." + rest; }

int fused_mid_channels(const ModelConfig& c) {
  int mid = 0;
  for (std::size_t s = 0; s < c.streams.size(); ++s) mid += c.block_channels(s)[1];
  return mid;
}

int head_inputs(const ModelConfig& c) {
  if (c.aggregator == Aggregator::none) return c.block_channels(0)[2];
  return c.k_clusters * c.k_percentiles * static_cast<int>(c.streams.size());
}

}  // namespace

ModelState init_model(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  ModelState m;
  m.config = config;
  m.seed = seed;
  std::mt19937_64 rng(seed);
  auto normal = [&](std::vector<int> shape, double stddev) {
    Tensor<float> t(std::move(shape));
    std::normal_distribution<double> d(0.0, stddev);
    for (auto& v : t.data) v = static_cast<float>(d(rng));
    return t;
  };
  for (std::size_t s = 0; s < config.streams.size(); ++s) {
    const auto ch = config.block_channels(s);
    int cin = input_channels(config.streams[s]);
    const char* names[3][2] = {{"conv1.w", "conv1.b"}, {"conv2.w", "conv2.b"}, {"conv3.w", "conv3.b"}};
    for (int b = 0; b < 3; ++b) {
      m.params[key(config, s, names[b][0])] = normal({ch[b], cin, 3, 3}, std::sqrt(2.0 / (cin * 9)));
      m.params[key(config, s, names[b][1])] = Tensor<float>({ch[b]});
      cin = ch[b];
    }
  }
  const int mid = fused_mid_channels(config), hidden = mid / config.se_reduction;
  m.params["se.w1"] = normal({hidden, mid}, std::sqrt(2.0 / mid));
  m.params["se.b1"] = Tensor<float>({hidden});
  m.params["se.w2"] = normal({mid, hidden}, std::sqrt(1.0 / hidden));
  m.params["se.b2"] = Tensor<float>({mid});
  if (config.aggregator == Aggregator::vlad) {
    const int D = config.k_percentiles * static_cast<int>(config.streams.size());
    Tensor<float> centers({config.k_clusters, D});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : centers.data) v = static_cast<float>(u(rng));
    m.params["vlad.centers"] = std::move(centers);
  }
  const int n = head_inputs(config);
  m.params["head.w"] = normal({1, n}, 1.0 / std::sqrt(static_cast<double>(n)));
  m.params["head.b"] = Tensor<float>({1});
  return m;
}

template <typename T>
ForwardTrace<T> forward_trace(const ModelConfig& config, const ParamMap<T>& params, std::vector<Tensor<T>> inputs) {
  const std::size_t S = config.streams.size();
  if (inputs.size() != S) {
    throw ConfigMismatch("model " + config.name + " expects " + std::to_string(S) + " input streams, got " +
                         std::to_string(inputs.size()));
  }
  for (std::size_t s = 0; s < S; ++s) {
    const std::vector<int> want{input_channels(config.streams[s]), config.patch_size, config.patch_size};
    if (inputs[s].shape != want) {
      throw ConfigMismatch(to_string(config.streams[s]) + " input " + shape_string(inputs[s].shape) +
                           " does not match " + shape_string(want));
    }
  }
  auto P = [&](const std::string& k) -> const Tensor<T>& {
    const auto it = params.find(k);
    if (it == params.end()) throw ConfigMismatch("missing parameter " + k);
    return it->second;
  };

  ForwardTrace<T> t;
  t.inputs = std::move(inputs);
  for (std::size_t s = 0; s < S; ++s) {
    t.a1.push_back(conv_block_forward(t.inputs[s], P(key(config, s, "conv1.w")), P(key(config, s, "conv1.b"))));
    t.a2.push_back(conv_block_forward(t.a1[s], P(key(config, s, "conv2.w")), P(key(config, s, "conv2.b"))));
  }
  std::vector<const Tensor<T>*> parts;
  std::vector<int> split;
  for (std::size_t s = 0; s < S; ++s) {
    parts.push_back(&t.a2[s]);
    split.push_back(t.a2[s].dim(0));
  }
  t.fused_mid = concat_channels(parts);
  const SeParams<T> se{P("se.w1"), P("se.b1"), P("se.w2"), P("se.b2")};
  t.a2_scaled = split_channels(se_block(t.fused_mid, se, &t.se_cache), split);
  for (std::size_t s = 0; s < S; ++s)
    t.a3.push_back(conv_block_forward(t.a2_scaled[s], P(key(config, s, "conv3.w")), P(key(config, s, "conv3.b"))));

  if (config.pooling == Pooling::avgpool) {
    for (std::size_t s = 0; s < S; ++s) t.pooled.push_back(global_avgpool(t.a3[s]));
    t.fused = Tensor<T>(t.pooled[0].shape);
    for (const auto& p : t.pooled)
      for (std::size_t i = 0; i < p.size(); ++i) t.fused.data[i] += p.data[i];
    t.head_in = t.fused;
  } else {
    std::vector<const Tensor<T>*> perc;
    t.perc_selected.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      t.corr.push_back(self_correlation(t.a3[s]));
      t.perc.push_back(percentile_pool(t.corr[s], config.k_percentiles, &t.perc_selected[s]));
    }
    for (const auto& p : t.perc) perc.push_back(&p);
    t.fused = concat_channels(perc);
    t.head_in = netvlad(t.fused, P("vlad.centers"), config.alpha);
  }
  const auto logit = linear(t.head_in, P("head.w"), P("head.b"));
  t.logit = static_cast<double>(logit.data[0]);
  t.score = sigmoid(t.logit);
  return t;
}

template <typename T>
void backward(const ModelConfig& config, const ParamMap<T>& params, const ForwardTrace<T>& t, double dlogit,
              ParamMap<T>& grads) {
  const std::size_t S = config.streams.size();
  auto P = [&](const std::string& k) -> const Tensor<T>& { return params.at(k); };
  auto G = [&](const std::string& k) -> Tensor<T>& {
    auto it = grads.find(k);
    if (it == grads.end()) it = grads.emplace(k, Tensor<T>(P(k).shape)).first;
    return it->second;
  };

  Tensor<T> glogit({1}, static_cast<T>(dlogit));
  Tensor<T> ghead;
  linear_backward(t.head_in, P("head.w"), glogit, ghead, G("head.w"), G("head.b"));

  std::vector<Tensor<T>> ga3(S);
  if (config.pooling == Pooling::avgpool) {
    for (std::size_t s = 0; s < S; ++s) ga3[s] = global_avgpool_backward(t.a3[s].shape, ghead);
  } else {
    Tensor<T> gfused;
    netvlad_backward(t.fused, P("vlad.centers"), config.alpha, ghead, gfused, G("vlad.centers"));
    std::vector<int> split;
    for (std::size_t s = 0; s < S; ++s) split.push_back(t.perc[s].dim(0));
    const auto gperc = split_channels(gfused, split);
    for (std::size_t s = 0; s < S; ++s) {
      const auto gcorr = percentile_pool_backward(t.perc_selected[s], t.corr[s].shape, gperc[s]);
      ga3[s] = self_correlation_backward(t.a3[s], gcorr);
    }
  }

  std::vector<Tensor<T>> gscaled(S);
  for (std::size_t s = 0; s < S; ++s) {
    const auto g = relu_backward(t.a3[s], ga3[s]);
    conv2d_backward(t.a2_scaled[s], P(key(config, s, "conv3.w")), 2, 1, g, &gscaled[s], G(key(config, s, "conv3.w")),
                    G(key(config, s, "conv3.b")));
  }
  std::vector<const Tensor<T>*> parts;
  std::vector<int> split;
  for (std::size_t s = 0; s < S; ++s) {
    parts.push_back(&gscaled[s]);
    split.push_back(gscaled[s].dim(0));
  }
  const SeParams<T> se{P("se.w1"), P("se.b1"), P("se.w2"), P("se.b2")};
  SeParams<T> gse{G("se.w1"), G("se.b1"), G("se.w2"), G("se.b2")};
  Tensor<T> gmid;
  se_block_backward(t.fused_mid, se, t.se_cache, concat_channels(parts), gmid, gse);
  G("se.w1") = std::move(gse.w1);
  G("se.b1") = std::move(gse.b1);
  G("se.w2") = std::move(gse.w2);
  G("se.b2") = std::move(gse.b2);
  const auto ga2 = split_channels(gmid, split);

  for (std::size_t s = 0; s < S; ++s) {
    Tensor<T> ga1;
    conv2d_backward(t.a1[s], P(key(config, s, "conv2.w")), 2, 1, relu_backward(t.a2[s], ga2[s]), &ga1,
                    G(key(config, s, "conv2.w")), G(key(config, s, "conv2.b")));
    conv2d_backward(t.inputs[s], P(key(config, s, "conv1.w")), 2, 1, relu_backward(t.a1[s], ga1),
                    static_cast<Tensor<T>*>(nullptr), G(key(config, s, "conv1.w")), G(key(config, s, "conv1.b")));
  }
}

template ForwardTrace<float> forward_trace(const ModelConfig&, const ParamMap<float>&, std::vector<Tensor<float>>);
template ForwardTrace<double> forward_trace(const ModelConfig&, const ParamMap<double>&, std::vector<Tensor<double>>);
template void backward(const ModelConfig&, const ParamMap<float>&, const ForwardTrace<float>&, double,
                       ParamMap<float>&);
template void backward(const ModelConfig&, const ParamMap<double>&, const ForwardTrace<double>&, double,
                       ParamMap<double>&);

double forward(const ModelState& model, const std::vector<Tensor<float>>& inputs) {
  return forward_trace(model.config, model.params, inputs).score;
}

std::map<std::string, std::vector<int>> introspect_shapes(const ModelState& model) {
  const auto& c = model.config;
  std::vector<Tensor<float>> inputs;
  for (auto s : c.streams) inputs.emplace_back(std::vector<int>{input_channels(s), c.patch_size, c.patch_size}, 0.5f);
  const auto t = forward_trace(c, model.params, std::move(inputs));
  std::map<std::string, std::vector<int>> shapes;
  shapes["backbone"] = t.a3[0].shape;
  shapes["fused_mid"] = t.fused_mid.shape;
  if (c.pooling == Pooling::avgpool) {
    shapes["avgpool"] = {static_cast<int>(t.pooled.size()), t.pooled[0].dim(0)};
  } else {
    shapes["self_correlation"] = t.corr[0].shape;
    shapes["percentile_pool"] = t.perc[0].shape;
    shapes["vlad"] = t.head_in.shape;
  }
  shapes["fused"] = t.fused.shape;
  shapes["head_in"] = t.head_in.shape;
  return shapes;
}

ParamMap<float> zeros_like(const ParamMap<float>& p) {
  ParamMap<float> out;
  for (const auto& [k, v] : p) out.emplace(k, Tensor<float>(v.shape));
  return out;
}

}  // namespace docforensics::net
