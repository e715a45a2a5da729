#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "mixprune/tensor.hpp"

namespace mixprune {

enum class LayerRole { Dense, Conv2D, Normalization, PatchEmbedding, ClassifierHead };

enum class Activation { None, ReLU };

std::string_view to_string(LayerRole role);
std::string_view to_string(Activation act);
// Throws InputError on unknown names.
LayerRole parse_role(std::string_view name);
Activation parse_activation(std::string_view name);

// One parameterised stage of a sequential network.
//
// Weight layouts:
//   Dense, ClassifierHead      [out, in]
//   Conv2D                     [out, in, kh, kw]   stride 1, zero padding `padding`
//   PatchEmbedding             [embed, channels * patch * patch]
//   Normalization              [features]          per-feature scale; bias is the shift
//
// Normalization applies (x - running_mean) / sqrt(running_var + eps) before the
// affine part. Running statistics are never updated by training.
struct Layer {
    int id = 0;
    LayerRole role = LayerRole::Dense;
    Activation activation = Activation::None;
    Tensor weight;
    std::optional<Tensor> bias;
    // (k - 1) / (L - 1) where k is the layer's ordinal among the L prunable
    // layers. Normalization layers inherit the value of the closest preceding
    // prunable layer.
    double depth_fraction = 0.0;

    std::size_t padding = 0;
    std::size_t patch_size = 0;

    Tensor running_mean;
    Tensor running_var;
    float norm_eps = 1e-5f;

    bool prunable() const noexcept { return role != LayerRole::Normalization; }
    std::size_t weight_count() const noexcept { return weight.size(); }
};

}  // namespace mixprune
