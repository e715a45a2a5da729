#include "testnets.hpp"

#include <random>
#include <stdexcept>

#include "oracle.hpp"

namespace testnets {

using namespace mixprune;

namespace {

void randomise(Network& net, std::uint64_t seed) {
    init_weights(net, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<float> u(-0.5f, 0.5f);
    for (Layer& l : net.layers()) {
        if (l.bias)
            for (float& b : l.bias->values()) b = u(rng) * 0.2f;
        if (l.role != LayerRole::Normalization) continue;
        for (std::size_t f = 0; f < l.weight.size(); ++f) {
            l.weight[f] = 1.0f + u(rng);
            l.running_mean[f] = u(rng) * 0.5f;
            l.running_var[f] = 1.0f + u(rng);
        }
    }
}

}  // namespace

Layer dense(LayerRole role, std::size_t in, std::size_t out, Activation act) {
    Layer l;
    l.role = role;
    l.activation = act;
    l.weight = Tensor({out, in});
    l.bias = Tensor({out});
    return l;
}

Layer norm(std::size_t features, Activation act) {
    Layer l;
    l.role = LayerRole::Normalization;
    l.activation = act;
    l.weight = Tensor({features}, 1.0f);
    l.bias = Tensor({features});
    l.running_mean = Tensor({features});
    l.running_var = Tensor({features}, 1.0f);
    return l;
}

Network tiny_mlp(std::uint64_t seed) {
    std::vector<Layer> layers;
    layers.push_back(dense(LayerRole::Dense, 3, 5));
    layers.push_back(norm(5));
    layers.push_back(dense(LayerRole::Dense, 5, 4, Activation::ReLU));
    layers.push_back(dense(LayerRole::ClassifierHead, 4, 3));
    Network net({3}, 3, std::move(layers));
    randomise(net, seed);
    return net;
}

Network tiny_conv(std::uint64_t seed) {
    std::vector<Layer> layers;
    Layer c1;
    c1.role = LayerRole::Conv2D;
    c1.weight = Tensor({3, 2, 3, 3});
    c1.bias = Tensor({3});
    c1.padding = 1;
    layers.push_back(c1);
    layers.push_back(norm(3));
    Layer c2;
    c2.role = LayerRole::Conv2D;
    c2.activation = Activation::ReLU;
    c2.weight = Tensor({2, 3, 3, 3});
    c2.bias = Tensor({2});
    layers.push_back(c2);
    layers.push_back(dense(LayerRole::ClassifierHead, 18, 3));
    Network net({2, 5, 5}, 3, std::move(layers));
    randomise(net, seed);
    return net;
}

Network tiny_patch(std::uint64_t seed) {
    std::vector<Layer> layers;
    Layer p = dense(LayerRole::PatchEmbedding, 8, 3);
    p.patch_size = 2;
    layers.push_back(p);
    layers.push_back(norm(12));
    layers.push_back(dense(LayerRole::Dense, 12, 4, Activation::ReLU));
    layers.push_back(dense(LayerRole::ClassifierHead, 4, 3));
    Network net({2, 4, 4}, 3, std::move(layers));
    randomise(net, seed);
    return net;
}

Tensor random_inputs(std::size_t n, std::size_t features, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    Tensor t({n, features});
    for (float& v : t.values()) v = u(rng);
    return t;
}

std::vector<std::int32_t> random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int32_t> u(0, static_cast<std::int32_t>(classes) - 1);
    std::vector<std::int32_t> y(n);
    for (auto& v : y) v = u(rng);
    return y;
}

std::uint64_t kink_free_seed(const Network& net, std::size_t n, double margin, std::uint64_t seed) {
    for (std::uint64_t s = seed; s < seed + 10000; ++s)
        if (oracle::relu_margin(net, random_inputs(n, net.input_features(), s)) >= margin) return s;
    throw std::runtime_error("no kink-free input batch found");
}

}  // namespace testnets
