#include "mixprune/optimizer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mixprune/errors.hpp"

namespace mixprune {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "adam") return OptimizerKind::Adam;
    if (name == "sgd") return OptimizerKind::Sgd;
    throw ConfigError(fmt::format("unknown optimizer '{}'", name));
}

void Optimizer::step(Network& net, const GradientRecord& grads) {
    const std::size_t count = net.layer_count();
    if (grads.weight.size() != count || grads.bias.size() != count) {
        throw ShapeError(0, "gradient record does not match the network");
    }
    for (std::size_t i = 0; i < count; ++i) {
        const Layer& l = net.layer(i);
        if (grads.weight[i].shape() != l.weight.shape() || grads.bias[i].has_value() != l.bias.has_value() ||
            (l.bias && grads.bias[i]->shape() != l.bias->shape())) {
            throw ShapeError(l.id, fmt::format("gradient for layer {} has the wrong shape", l.id));
        }
        if (!grads.weight[i].all_finite() || (grads.bias[i] && !grads.bias[i]->all_finite())) {
            throw NumericError(l.id, fmt::format("non-finite gradient in layer {} ({}) at step {}", l.id,
                                                 to_string(l.role), steps_ + 1));
        }
    }
    if (weight_state_.empty() && config_.kind == OptimizerKind::Adam) {
        weight_state_.resize(count);
        bias_state_.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            const Layer& l = net.layer(i);
            weight_state_[i] = {std::vector<double>(l.weight.size()), std::vector<double>(l.weight.size())};
            if (l.bias) bias_state_[i] = {std::vector<double>(l.bias->size()), std::vector<double>(l.bias->size())};
        }
    }
    ++steps_;
    const double t = static_cast<double>(steps_);
    const double bias1 = 1.0 - std::pow(config_.beta1, t);
    const double bias2 = 1.0 - std::pow(config_.beta2, t);
    const bool adam = config_.kind == OptimizerKind::Adam;
    for (std::size_t i = 0; i < count; ++i) {
        Layer& l = net.layer(i);
        update(l.weight.values(), grads.weight[i].values(), adam ? &weight_state_[i] : nullptr, bias1, bias2);
        if (l.bias) update(l.bias->values(), grads.bias[i]->values(), adam ? &bias_state_[i] : nullptr, bias1, bias2);
    }
}

void Optimizer::update(std::span<float> params, std::span<const float> grad, Moments* state, double bias1,
                       double bias2) {
    const double lr = config_.learning_rate;
    if (!state) {
        for (std::size_t k = 0; k < params.size(); ++k)
            params[k] = static_cast<float>(static_cast<double>(params[k]) - lr * grad[k]);
        return;
    }
    const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.epsilon;
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grad[k];
        state->m[k] = b1 * state->m[k] + (1.0 - b1) * g;
        state->v[k] = b2 * state->v[k] + (1.0 - b2) * g * g;
        const double m_hat = state->m[k] / bias1;
        const double v_hat = state->v[k] / bias2;
        params[k] = static_cast<float>(params[k] - lr * m_hat / (std::sqrt(v_hat) + eps));
    }
}

}  // namespace mixprune
