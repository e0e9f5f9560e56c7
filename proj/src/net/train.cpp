#include "docforensics/net/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "docforensics/forensic_ops.hpp"
#include "docforensics/image_io.hpp"
#include "docforensics/localization.hpp"

namespace docforensics::net {

namespace fo = docforensics::forensic_ops;
namespace ts = docforensics::tamper_synth;

StreamSources build_sources(const Raster& image, bool with_srm) {
  StreamSources s;
  s.image = image;
  s.ela = fo::ela_difference(image);
  if (with_srm) s.srm = fo::srm_residuals(image);
  return s;
}

std::vector<Tensor<float>> extract_inputs(const StreamSources& src, Point origin, const ModelConfig& config) {
  const int P = config.patch_size;
  const int W = src.image.width(), H = src.image.height();
  auto px = [&](int x) { return std::min(origin.x + x, W - 1); };
  auto py = [&](int y) { return std::min(origin.y + y, H - 1); };
  std::vector<Tensor<float>> out;
  for (auto stream : config.streams) {
    Tensor<float> t({input_channels(stream), P, P});
    switch (stream) {
      case Stream::rgb:
        for (int c = 0; c < 3; ++c)
          for (int y = 0; y < P; ++y)
            for (int x = 0; x < P; ++x) t.at(c, y, x) = src.image.at(px(x), py(y), c) / 255.0f - 0.5f;
        break;
      case Stream::ela:
        for (int y = 0; y < P; ++y)
          for (int x = 0; x < P; ++x) t.at(0, y, x) = static_cast<float>(src.ela.at(px(x), py(y))) * kElaInputGain;
        break;
      case Stream::srm:
        if (!src.srm) throw ConfigMismatch("model needs an SRM stream but sources were built without it");
        for (int c = 0; c < 3; ++c)
          for (int y = 0; y < P; ++y)
            for (int x = 0; x < P; ++x) t.at(c, y, x) = static_cast<float>((*src.srm)[c].at(px(x), py(y)));
        break;
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::pair<std::vector<ts::ManifestRow>, std::vector<ts::ManifestRow>> split_rows(const std::vector<ts::ManifestRow>& rows,
                                                                                double train_fraction,
                                                                                std::uint64_t seed) {
  std::vector<ts::ManifestRow> train_rows, test_rows;
  std::mt19937_64 rng(seed);
  for (auto label : {ts::Label::clean, ts::Label::tampered}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].label == label) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) (k < n_train ? train_rows : test_rows).push_back(rows[idx[k]]);
  }
  auto by_id = [](const ts::ManifestRow& a, const ts::ManifestRow& b) { return a.id < b.id; };
  std::sort(train_rows.begin(), train_rows.end(), by_id);
  std::sort(test_rows.begin(), test_rows.end(), by_id);
  return {train_rows, test_rows};
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

std::optional<Region> mask_bbox(const GrayMap& mask) {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y) >= 0.5) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
  if (x1 < 0) return std::nullopt;
  return Region{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

}  // namespace

std::vector<PatchExample> build_patch_dataset(const std::filesystem::path& corpus_dir,
                                              const std::vector<ts::ManifestRow>& rows, const ModelConfig& config,
                                              std::uint64_t seed) {
  const bool with_srm = std::find(config.streams.begin(), config.streams.end(), Stream::srm) != config.streams.end();
  const int P = config.patch_size;
  std::vector<PatchExample> out;
  for (const auto& row : rows) {
    const Raster image = io::decode_image(io::read_file(corpus_dir / row.path));
    std::mt19937_64 rng(ts::mix_seed(seed, fnv1a(row.id)));
    std::uniform_int_distribution<int> jitter(-P / 8, P / 8);
    Region target{image.width() / 2, image.height() / 2, 1, 1};
    if (row.label == ts::Label::tampered) {
      const GrayMap mask = io::decode_png_gray(io::read_file(corpus_dir / row.mask_path));
      if (auto box = mask_bbox(mask)) target = *box;
    } else {
      const auto regions = localization::builtin_cc(image);
      if (!regions.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, regions.size() - 1);
        target = regions[pick(rng)];
        if (target.w > P) {
          std::uniform_int_distribution<int> slide(0, target.w - P);
          target.x += slide(rng);
          target.w = P;
        }
      }
    }
    target.x += jitter(rng);
    target.y += jitter(rng);
    const auto origin = localization::window_origins(image.width(), image.height(), target,
                                                     localization::CropStrategy::V0, {P, 0.25})
                            .front();
    const auto sources = build_sources(image, with_srm);
    out.push_back({row.id, extract_inputs(sources, origin, config), row.label == ts::Label::tampered ? 1 : 0, origin});
  }
  return out;
}

TrainResult train(const ModelState& init, const std::vector<PatchExample>& examples, const TrainParams& params) {
  if (examples.empty()) throw EmptyCorpus("no training examples");
  const bool has_pos = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label == 1; });
  const bool has_neg = std::any_of(examples.begin(), examples.end(), [](const auto& e) { return e.label == 0; });
  if (!has_pos || !has_neg) throw EmptyCorpus("training corpus needs both clean and tampered examples");
  if (params.epochs < 1 || params.batch < 1) throw InvalidArgument("epochs and batch must be positive");

  TrainResult result;
  result.model = init;
  ModelState& m = result.model;
  const double lr = params.lr.value_or(m.config.lr);
  auto velocity = zeros_like(m.params);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::mt19937_64 rng(ts::mix_seed(params.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(params.batch)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(params.batch));
      ParamMap<float> grads = zeros_like(m.params);
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = examples[order[i]];
        const auto trace = forward_trace(m.config, m.params, ex.inputs);
        double dlogit = 0.0;
        loss_sum += bce_with_logit(trace.logit, ex.label, &dlogit);
        backward(m.config, m.params, trace, dlogit, grads);
      }
      const float inv = 1.0f / static_cast<float>(end - start);
      for (auto& [name, w] : m.params) {
        auto& v = velocity.at(name).data;
        const auto& g = grads.at(name).data;
        for (std::size_t k = 0; k < w.size(); ++k) {
          v[k] = static_cast<float>(params.momentum) * v[k] + g[k] * inv;
          w.data[k] -= static_cast<float>(lr) * v[k];
        }
      }
      ++m.step;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(examples.size()));
  }
  return result;
}

PatchCounts evaluate_patches(const ModelState& model, const std::vector<PatchExample>& examples, double threshold) {
  PatchCounts c;
  for (const auto& ex : examples) {
    const bool predicted = forward(model, ex.inputs) >= threshold;
    if (predicted && ex.label == 1) ++c.tp;
    else if (predicted) ++c.fp;
    else if (ex.label == 1) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::string loss_csv(const std::vector<double>& epoch_loss) {
  std::string out = "epoch,mean_loss\n";
  char buf[64];
  for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", i + 1, epoch_loss[i]);
    out += buf;
  }
  return out;
}

}  // namespace docforensics::net
