#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "docforensics/image.hpp"
#include "docforensics/net/model.hpp"
#include "docforensics/tamper_synth.hpp"

namespace docforensics::net {

/// Multiplier applied to raw ELA differences (fraction of 255) before they enter the network.
inline constexpr float kElaInputGain = 16.0f;

/// Full-image evidence planes patches are cut from. ELA and SRM depend on
/// the 8x8 grid and on neighbours, so they are computed before cropping.
struct StreamSources {
  Raster image;
  GrayMap ela;                              // raw difference, fraction of 255
  std::optional<std::array<GrayMap, 3>> srm;
};

StreamSources build_sources(const Raster& image, bool with_srm);

/// Network inputs for the P x P window at `origin`, in config.streams order.
std::vector<Tensor<float>> extract_inputs(const StreamSources& sources, Point origin, const ModelConfig& config);

struct PatchExample {
  std::string id;
  std::vector<Tensor<float>> inputs;
  int label = 0;  // 1 = tampered
  Point origin;
};

/// Stratified seeded split of manifest rows into (train, test).
std::pair<std::vector<tamper_synth::ManifestRow>, std::vector<tamper_synth::ManifestRow>> split_rows(
    const std::vector<tamper_synth::ManifestRow>& rows, double train_fraction, std::uint64_t seed);

/// One centre-crop patch per row: tampered rows are centred on the mask's
/// bounding box (seeded jitter), clean rows on a detected text region.
std::vector<PatchExample> build_patch_dataset(const std::filesystem::path& corpus_dir,
                                              const std::vector<tamper_synth::ManifestRow>& rows,
                                              const ModelConfig& config, std::uint64_t seed);

struct TrainParams {
  std::optional<double> lr;  // defaults to the config's lr
  int epochs = 10;
  int batch = 16;
  std::uint64_t seed = 1;
  double momentum = 0.9;
};

struct TrainResult {
  ModelState model;
  std::vector<double> epoch_loss;  // mean BCE per epoch
};

/// Minibatch SGD with momentum on binary cross-entropy. Deterministic given
/// the seed. Throws EmptyCorpus when the examples are empty or single-class.
TrainResult train(const ModelState& init, const std::vector<PatchExample>& examples, const TrainParams& params);

struct PatchCounts {
  int tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy() const { return (tp + tn) / static_cast<double>(std::max(1, tp + fp + fn + tn)); }
};

PatchCounts evaluate_patches(const ModelState& model, const std::vector<PatchExample>& examples,
                             double threshold = 0.5);

std::string loss_csv(const std::vector<double>& epoch_loss);

}  // namespace docforensics::net
