#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixprune/layer.hpp"
#include "mixprune/tensor.hpp"

namespace mixprune {

// Ordered stack of layers mapping a per-sample input of `input_shape` to
// `classes` logits. Construction validates every layer against the shape
// flowing into it, assigns ids 1..L and computes depth fractions.
class Network {
  public:
    Network() = default;
    Network(Shape input_shape, std::size_t classes, std::vector<Layer> layers);

    const Shape& input_shape() const noexcept { return input_shape_; }
    std::size_t input_features() const noexcept { return shape_numel(input_shape_); }
    std::size_t classes() const noexcept { return classes_; }

    std::span<const Layer> layers() const noexcept { return layers_; }
    // Mutable access is for parameter updates only; shapes must not change.
    std::span<Layer> layers() noexcept { return layers_; }
    const Layer& layer(std::size_t index) const { return layers_.at(index); }
    Layer& layer(std::size_t index) { return layers_.at(index); }
    std::size_t layer_count() const noexcept { return layers_.size(); }
    std::size_t prunable_count() const noexcept;

    // Per-sample shape entering / leaving layer `index`.
    const Shape& in_shape(std::size_t index) const { return in_shapes_.at(index); }
    const Shape& out_shape(std::size_t index) const { return out_shapes_.at(index); }

    // Free-form tag stored in model files (strategy name for pruned models).
    std::string tag;

  private:
    Shape input_shape_;
    std::size_t classes_ = 0;
    std::vector<Layer> layers_;
    std::vector<Shape> in_shapes_;
    std::vector<Shape> out_shapes_;
};

// Per-layer parameter gradients, indexed like Network::layers().
struct GradientRecord {
    std::vector<Tensor> weight;
    std::vector<std::optional<Tensor>> bias;
};

struct LossAndGradients {
    double loss = 0.0;
    GradientRecord grads;
};

// Logits of shape [batch, classes]. `inputs` is [batch, ...] with the
// per-sample element count of the network input.
Tensor forward(const Network& net, const Tensor& inputs);

// Input of every layer followed by the logits: element i has shape
// [batch, in_shape(i)...], the last one [batch, classes].
std::vector<Tensor> forward_trace(const Network& net, const Tensor& inputs);
// Mean softmax cross-entropy over the batch and its parameter gradients.
LossAndGradients loss_and_gradients(const Network& net, const Tensor& inputs, std::span<const std::int32_t> labels);

// Mean softmax cross-entropy of precomputed logits.
double cross_entropy(const Tensor& logits, std::span<const std::int32_t> labels);

// Rows [begin, end) of a [n, ...] tensor.
Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end);
// Rows picked by index, in the given order.
Tensor gather_rows(const Tensor& t, std::span<const std::size_t> rows);

// Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)) for every prunable
// weight; biases zero; normalization scale one, shift zero, identity stats.
void init_weights(Network& net, std::uint64_t seed);

}  // namespace mixprune
