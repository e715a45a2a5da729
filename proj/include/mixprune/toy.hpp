#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "mixprune/config.hpp"
#include "mixprune/dataset.hpp"
#include "mixprune/network.hpp"
#include "mixprune/prune.hpp"

namespace mixprune {

enum class ToyArchitecture { Mlp2, Mlp4WithNorm, ConvnetSmall, PatchMlp };
enum class ToyDataset { TwoRings, Blobs, IdxFile };

std::string_view to_string(ToyArchitecture arch);
std::string_view to_string(ToyDataset dataset);
// Throws ConfigError on unknown names.
ToyArchitecture parse_architecture(std::string_view name);
ToyDataset parse_toy_dataset(std::string_view name);

// Architectures and their default widths:
//   mlp-2            Dense(h) Norm Classifier                          h = 64
//   mlp-4-with-norm  Dense(h) Norm Dense(h) Norm Dense(h) Classifier   h = 128
//   convnet-small    Conv(a) Norm Conv(b) Conv(c) Classifier           a, b, c = 16, 72, 32
//   patch-mlp        PatchEmbedding(e) Norm Dense(h) Classifier        e, h = 64, 64
//
// two-rings has 2 features and only feeds the MLPs. blobs is generated with
// whatever input the architecture wants: 2 features for the MLPs, 1x6x6 for
// convnet-small and 3x16x16 for patch-mlp. An idx file must hold square
// images (convnet-small, patch-mlp) or any flat vectors (MLPs).
struct ToySpec {
    ToyArchitecture architecture = ToyArchitecture::Mlp4WithNorm;
    std::vector<std::size_t> widths;  // empty: the defaults above
    std::size_t classes = 0;          // 0: 2 for two-rings, 4 for blobs, labels for idx
    ToyDataset dataset = ToyDataset::TwoRings;
    std::size_t samples = 2000;
    double noise = 0.2;
    std::optional<std::filesystem::path> idx_images;
    std::optional<std::filesystem::path> idx_labels;
    double calibration_fraction = 0.10;
};

struct ToyBundle {
    Network model;
    DataSplits data;
};

// Untrained model (normalization statistics fitted to the training split)
// plus 60/20/20 train/validation/test splits and a calibration subset of the
// training split. Throws ConfigError for inconsistent specs.
ToyBundle build_toy(const ToySpec& spec, std::uint64_t seed);

// Concentric circles of radius 1 (class 0) and 2 (class 1), Gaussian noise
// on both coordinates. Classes alternate row by row.
DatasetSplit make_two_rings(std::size_t samples, double noise, std::uint64_t seed);
// Isotropic Gaussian clusters around random centres in [-2, 2]^features.
DatasetSplit make_blobs(std::size_t samples, std::size_t features, std::size_t classes, double noise,
                        std::uint64_t seed);

// Shuffled 60/20/20 split and a stratified calibration subset of `fraction`
// of the training rows.
DataSplits split_dataset(const DatasetSplit& pool, double calibration_fraction, std::uint64_t seed);

// Fits every normalization layer's running statistics, front to back, to the
// activations `samples` produces. Population variance.
void calibrate_normalization(Network& net, const Tensor& samples);

// Dense training of all parameters from the current weights. Returns the
// best-validation checkpoint.
FineTuneOutcome train_baseline(const Network& model, const DataSplits& data, const FineTuneConfig& config,
                               std::uint64_t seed);

// Training settings the bundled fixtures use: Adam at 1e-2, 40 epochs,
// patience 8, batch 64.
FineTuneConfig baseline_training_config();

}  // namespace mixprune
