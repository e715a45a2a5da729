#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mixprune/network.hpp"

namespace mixprune {

enum class OptimizerKind { Adam, Sgd };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// Adam or plain SGD over every layer parameter. Moment buffers are created on
// the first step and sized from the network passed in.
class Optimizer {
  public:
    explicit Optimizer(OptimizerConfig config) : config_(config) {}

    // Throws NumericError naming the first layer with a non-finite gradient;
    // the network is left untouched in that case.
    void step(Network& net, const GradientRecord& grads);

    std::uint64_t steps() const noexcept { return steps_; }
    const OptimizerConfig& config() const noexcept { return config_; }

  private:
    struct Moments {
        std::vector<double> m;
        std::vector<double> v;
    };

    void update(std::span<float> params, std::span<const float> grad, Moments* state, double bias1, double bias2);

    OptimizerConfig config_;
    std::uint64_t steps_ = 0;
    std::vector<Moments> weight_state_;
    std::vector<Moments> bias_state_;
};

}  // namespace mixprune
