#include "mixprune/toy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "mixprune/errors.hpp"

namespace mixprune {

namespace {

constexpr std::array<std::pair<ToyArchitecture, std::string_view>, 4> kArchNames{{
    {ToyArchitecture::Mlp2, "mlp-2"},
    {ToyArchitecture::Mlp4WithNorm, "mlp-4-with-norm"},
    {ToyArchitecture::ConvnetSmall, "convnet-small"},
    {ToyArchitecture::PatchMlp, "patch-mlp"},
}};

constexpr std::array<std::pair<ToyDataset, std::string_view>, 3> kDatasetNames{{
    {ToyDataset::TwoRings, "two-rings"},
    {ToyDataset::Blobs, "blobs"},
    {ToyDataset::IdxFile, "idx-file"},
}};

Layer linear(LayerRole role, std::size_t in, std::size_t out, Activation act = Activation::None) {
    Layer l;
    l.role = role;
    l.activation = act;
    l.weight = Tensor({out, in});
    l.bias = Tensor({out});
    return l;
}

Layer conv(std::size_t in, std::size_t out, Activation act) {
    Layer l;
    l.role = LayerRole::Conv2D;
    l.activation = act;
    l.weight = Tensor({out, in, 3, 3});
    l.bias = Tensor({out});
    l.padding = 1;
    return l;
}

Layer norm(std::size_t features, Activation act = Activation::ReLU) {
    Layer l;
    l.role = LayerRole::Normalization;
    l.activation = act;
    l.weight = Tensor({features}, 1.0f);
    l.bias = Tensor({features});
    l.running_mean = Tensor({features});
    l.running_var = Tensor({features}, 1.0f);
    return l;
}

std::vector<std::size_t> widths_or(const ToySpec& spec, std::vector<std::size_t> defaults) {
    if (spec.widths.empty()) return defaults;
    if (spec.widths.size() != defaults.size()) {
        throw ConfigError(fmt::format("{} takes {} widths, got {}", to_string(spec.architecture), defaults.size(),
                                      spec.widths.size()));
    }
    for (std::size_t w : spec.widths)
        if (w == 0) throw ConfigError("layer widths must be positive");
    return spec.widths;
}

// Square image side for `features` values with `channels` channels, or 0.
std::size_t square_side(std::size_t features, std::size_t channels) {
    if (features % channels != 0) return 0;
    const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(features / channels))));
    return side * side * channels == features ? side : 0;
}

Shape input_shape_for(ToyArchitecture arch, std::size_t features) {
    switch (arch) {
        case ToyArchitecture::Mlp2:
        case ToyArchitecture::Mlp4WithNorm:
            return {features};
        case ToyArchitecture::ConvnetSmall:
            if (const std::size_t s = square_side(features, 1)) return {1, s, s};
            break;
        case ToyArchitecture::PatchMlp:
            for (std::size_t c : {3u, 1u})
                if (const std::size_t s = square_side(features, c); s >= 2 && s % 2 == 0) return {c, s, s};
            break;
    }
    throw ConfigError(fmt::format("{} cannot take {}-feature inputs", to_string(arch), features));
}

Network build_network(const ToySpec& spec, const Shape& input, std::size_t classes) {
    std::vector<Layer> layers;
    const std::size_t features = shape_numel(input);
    switch (spec.architecture) {
        case ToyArchitecture::Mlp2: {
            const auto w = widths_or(spec, {64});
            layers.push_back(linear(LayerRole::Dense, features, w[0]));
            layers.push_back(norm(w[0]));
            layers.push_back(linear(LayerRole::ClassifierHead, w[0], classes));
            break;
        }
        case ToyArchitecture::Mlp4WithNorm: {
            const auto w = widths_or(spec, {128});
            layers.push_back(linear(LayerRole::Dense, features, w[0]));
            layers.push_back(norm(w[0]));
            layers.push_back(linear(LayerRole::Dense, w[0], w[0]));
            layers.push_back(norm(w[0]));
            layers.push_back(linear(LayerRole::Dense, w[0], w[0], Activation::ReLU));
            layers.push_back(linear(LayerRole::ClassifierHead, w[0], classes));
            break;
        }
        case ToyArchitecture::ConvnetSmall: {
            const auto w = widths_or(spec, {16, 72, 32});
            layers.push_back(conv(input[0], w[0], Activation::None));
            layers.push_back(norm(w[0]));
            layers.push_back(conv(w[0], w[1], Activation::ReLU));
            layers.push_back(conv(w[1], w[2], Activation::ReLU));
            layers.push_back(linear(LayerRole::ClassifierHead, w[2] * input[1] * input[2], classes));
            break;
        }
        case ToyArchitecture::PatchMlp: {
            const auto w = widths_or(spec, {64, 64});
            const std::size_t patch = input[1] / 2;
            Layer embed = linear(LayerRole::PatchEmbedding, input[0] * patch * patch, w[0]);
            embed.patch_size = patch;
            layers.push_back(std::move(embed));
            layers.push_back(norm(4 * w[0]));
            layers.push_back(linear(LayerRole::Dense, 4 * w[0], w[1], Activation::ReLU));
            layers.push_back(linear(LayerRole::ClassifierHead, w[1], classes));
            break;
        }
    }
    Network net(input, classes, std::move(layers));
    net.tag = std::string(to_string(spec.architecture));
    return net;
}

DatasetSplit generate(const ToySpec& spec, std::size_t features, std::uint64_t seed) {
    switch (spec.dataset) {
        case ToyDataset::TwoRings:
            if (spec.classes != 0 && spec.classes != 2) throw ConfigError("two-rings has exactly 2 classes");
            return make_two_rings(spec.samples, spec.noise, seed);
        case ToyDataset::Blobs:
            return make_blobs(spec.samples, features, spec.classes ? spec.classes : 4, spec.noise, seed);
        case ToyDataset::IdxFile: {
            if (!spec.idx_images) throw ConfigError("idx-file dataset needs an images path");
            DatasetSplit d = load_dataset(*spec.idx_images, DatasetFormat::Idx, SplitTag::Train, spec.idx_labels);
            if (spec.samples && spec.samples < d.size()) {
                std::vector<std::size_t> rows(spec.samples);
                std::iota(rows.begin(), rows.end(), std::size_t{0});
                d = subset(d, rows, SplitTag::Train);
            }
            return d;
        }
    }
    throw ConfigError("unknown dataset");
}

// Input features the architecture wants from a synthetic dataset.
std::size_t synthetic_features(ToyArchitecture arch) {
    switch (arch) {
        case ToyArchitecture::ConvnetSmall:
            return 36;
        case ToyArchitecture::PatchMlp:
            return 768;
        default:
            return 2;
    }
}

}  // namespace

std::string_view to_string(ToyArchitecture arch) {
    for (const auto& [a, name] : kArchNames)
        if (a == arch) return name;
    return "?";
}

std::string_view to_string(ToyDataset dataset) {
    for (const auto& [d, name] : kDatasetNames)
        if (d == dataset) return name;
    return "?";
}

ToyArchitecture parse_architecture(std::string_view name) {
    for (const auto& [a, n] : kArchNames)
        if (n == name) return a;
    throw ConfigError(fmt::format("unknown architecture '{}'", name));
}

ToyDataset parse_toy_dataset(std::string_view name) {
    for (const auto& [d, n] : kDatasetNames)
        if (n == name) return d;
    throw ConfigError(fmt::format("unknown dataset '{}'", name));
}

DatasetSplit make_two_rings(std::size_t samples, double noise, std::uint64_t seed) {
    if (samples < 2) throw ConfigError("two-rings needs at least 2 samples");
    if (!(noise >= 0.0)) throw ConfigError("noise must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::normal_distribution<double> jitter(0.0, noise > 0.0 ? noise : 1.0);
    DatasetSplit d;
    d.inputs = Tensor({samples, 2});
    d.labels.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const auto label = static_cast<std::int32_t>(i % 2);
        const double r = label == 0 ? 1.0 : 2.0;
        const double t = angle(rng);
        const double dx = noise > 0.0 ? jitter(rng) : 0.0;
        const double dy = noise > 0.0 ? jitter(rng) : 0.0;
        d.inputs[2 * i] = static_cast<float>(r * std::cos(t) + dx);
        d.inputs[2 * i + 1] = static_cast<float>(r * std::sin(t) + dy);
        d.labels[i] = label;
    }
    return d;
}

DatasetSplit make_blobs(std::size_t samples, std::size_t features, std::size_t classes, double noise,
                        std::uint64_t seed) {
    if (classes < 2 || samples < classes) throw ConfigError("blobs needs at least 2 classes and one sample per class");
    if (features == 0) throw ConfigError("blobs needs at least one feature");
    if (!(noise >= 0.0)) throw ConfigError("noise must be non-negative");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(-2.0, 2.0);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::vector<double> centres(classes * features);
    for (double& c : centres) c = centre(rng);
    DatasetSplit d;
    d.inputs = Tensor({samples, features});
    d.labels.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const std::size_t label = i % classes;
        for (std::size_t f = 0; f < features; ++f)
            d.inputs[i * features + f] = static_cast<float>(centres[label * features + f] + noise * jitter(rng));
        d.labels[i] = static_cast<std::int32_t>(label);
    }
    return d;
}

DataSplits split_dataset(const DatasetSplit& pool, double calibration_fraction, std::uint64_t seed) {
    const std::size_t n = pool.size();
    const std::size_t n_train = n * 6 / 10;
    const std::size_t n_val = n / 5;
    if (n_train == 0 || n_val == 0 || n - n_train - n_val == 0) {
        throw ConfigError(fmt::format("{} samples are too few for a 60/20/20 split", n));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto part = [&](std::size_t begin, std::size_t end, SplitTag tag) {
        return subset(pool, std::span<const std::size_t>(order).subspan(begin, end - begin), tag);
    };
    DataSplits s;
    s.train = part(0, n_train, SplitTag::Train);
    s.validation = part(n_train, n_train + n_val, SplitTag::Validation);
    s.test = part(n_train + n_val, n, SplitTag::Test);
    s.calibration = derive_calibration(s.train, calibration_fraction, seed);
    return s;
}

void calibrate_normalization(Network& net, const Tensor& samples) {
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        Layer& l = net.layer(i);
        if (l.role != LayerRole::Normalization) continue;
        const std::vector<Tensor> trace = forward_trace(net, samples);
        const Tensor& x = trace[i];
        const Shape& in = net.in_shape(i);
        const std::size_t features = l.weight.size();
        const std::size_t inner = in.size() == 3 ? in[1] * in[2] : 1;
        const std::size_t batch = x.dim(0);
        const double count = static_cast<double>(batch * inner);
        for (std::size_t f = 0; f < features; ++f) {
            double sum = 0.0, sq = 0.0;
            for (std::size_t n = 0; n < batch; ++n) {
                const float* p = x.data() + (n * features + f) * inner;
                for (std::size_t k = 0; k < inner; ++k) {
                    sum += p[k];
                    sq += static_cast<double>(p[k]) * p[k];
                }
            }
            const double mean = sum / count;
            l.running_mean[f] = static_cast<float>(mean);
            l.running_var[f] = static_cast<float>(std::max(0.0, sq / count - mean * mean));
        }
    }
}

ToyBundle build_toy(const ToySpec& spec, std::uint64_t seed) {
    if (spec.dataset == ToyDataset::TwoRings && spec.architecture != ToyArchitecture::Mlp2 &&
        spec.architecture != ToyArchitecture::Mlp4WithNorm) {
        throw ConfigError(fmt::format("two-rings has 2 features; {} needs image inputs", to_string(spec.architecture)));
    }
    const DatasetSplit pool = generate(spec, synthetic_features(spec.architecture), seed);
    const std::size_t classes = spec.classes ? spec.classes : pool.class_count();
    if (pool.class_count() > classes) {
        throw ConfigError(fmt::format("dataset has {} classes, spec declares {}", pool.class_count(), classes));
    }
    const Shape input = input_shape_for(spec.architecture, pool.features());
    ToyBundle bundle{build_network(spec, input, classes), split_dataset(pool, spec.calibration_fraction, seed)};
    init_weights(bundle.model, seed);
    calibrate_normalization(bundle.model, bundle.data.train.inputs);
    return bundle;
}

FineTuneOutcome train_baseline(const Network& model, const DataSplits& data, const FineTuneConfig& config,
                               std::uint64_t seed) {
    return fine_tune(model, PruneMask{}, data.train, data.validation, config, seed);
}

FineTuneConfig baseline_training_config() {
    FineTuneConfig c;
    c.optimizer.learning_rate = 1e-2;
    c.max_epochs = 40;
    c.patience = 8;
    c.batch_size = 64;
    return c;
}

}  // namespace mixprune
