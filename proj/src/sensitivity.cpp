#include "mixprune/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <fmt/format.h>

#include "mixprune/digest.hpp"
#include "mixprune/errors.hpp"

namespace mixprune {

std::string_view to_string(Criterion c) {
    switch (c) {
        case Criterion::Magnitude: return "magnitude";
        case Criterion::Gradient: return "gradient";
        case Criterion::Product: return "product";
    }
    return "unknown";
}

Criterion parse_criterion(std::string_view name) {
    if (name == "magnitude") return Criterion::Magnitude;
    if (name == "gradient") return Criterion::Gradient;
    if (name == "product") return Criterion::Product;
    throw ConfigError(fmt::format("unknown criterion '{}' (expected magnitude, gradient or product)", name));
}

bool SensitivityMap::has_layer(int layer_id) const noexcept {
    return std::find(ids_.begin(), ids_.end(), layer_id) != ids_.end();
}

std::span<const float> SensitivityMap::scores(int layer_id) const {
    const auto it = std::find(ids_.begin(), ids_.end(), layer_id);
    if (it == ids_.end()) throw InputError(fmt::format("layer {} has no sensitivity scores", layer_id));
    return scores_[static_cast<std::size_t>(it - ids_.begin())];
}

struct SensitivityBuilder {
    static SensitivityMap make(Criterion c, std::string calibration) {
        SensitivityMap m;
        m.criterion_ = c;
        m.calibration_ = std::move(calibration);
        return m;
    }
    static void add(SensitivityMap& m, int id, std::vector<float> scores) {
        m.ids_.push_back(id);
        m.scores_.push_back(std::move(scores));
    }
    static void mark_zero_gradient(SensitivityMap& m, int id) { m.zero_gradient_.push_back(id); }
};

namespace {

std::vector<float> abs_values(std::span<const float> v) {
    std::vector<float> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](float x) { return std::fabs(x); });
    return out;
}

// Gradient of the mean loss over the whole calibration set: per-batch mean
// gradients weighted by batch size / n. Indexed like net.layers().
std::vector<std::vector<float>> mean_gradient(const Network& net, const DatasetSplit& calibration,
                                              std::size_t batch_size) {
    if (calibration.size() == 0) throw ConfigError("gradient sensitivity needs a non-empty calibration set");
    if (batch_size == 0) throw ConfigError("batch size must be positive");
    const std::size_t n = calibration.size();
    std::vector<std::vector<double>> acc(net.layer_count());
    for (std::size_t i = 0; i < net.layer_count(); ++i) acc[i].assign(net.layer(i).weight_count(), 0.0);
    for (std::size_t begin = 0; begin < n; begin += batch_size) {
        const std::size_t end = std::min(n, begin + batch_size);
        const Tensor x = slice_rows(calibration.inputs, begin, end);
        const std::span<const std::int32_t> y(calibration.labels.data() + begin, end - begin);
        const LossAndGradients lg = loss_and_gradients(net, x, y);
        const double weight = static_cast<double>(end - begin) / static_cast<double>(n);
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            const auto g = lg.grads.weight[i].values();
            for (std::size_t k = 0; k < g.size(); ++k) acc[i][k] += weight * g[k];
        }
    }
    std::vector<std::vector<float>> out(net.layer_count());
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        out[i].resize(acc[i].size());
        for (std::size_t k = 0; k < acc[i].size(); ++k) out[i][k] = static_cast<float>(acc[i][k]);
    }
    return out;
}

std::string calibration_tag(const DatasetSplit& calibration, std::uint64_t seed) {
    return fmt::format("{}:{}", dataset_fingerprint(calibration), seed);
}

void require_prunable(const Network& net) {
    if (net.prunable_count() == 0) throw ConfigError("model has no prunable layers");
}

SensitivityMap gradient_map(const Network& net, const DatasetSplit& calibration, std::size_t batch_size,
                            std::uint64_t seed, Criterion criterion) {
    require_prunable(net);
    const auto grads = mean_gradient(net, calibration, batch_size);
    SensitivityMap map = SensitivityBuilder::make(criterion, calibration_tag(calibration, seed));
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& l = net.layer(i);
        if (!l.prunable()) continue;
        std::vector<float> g = abs_values(grads[i]);
        if (std::all_of(g.begin(), g.end(), [](float v) { return v == 0.0f; })) {
            SensitivityBuilder::mark_zero_gradient(map, l.id);
            std::cerr << fmt::format("warning: layer {} has an all-zero gradient map; ranking falls back to index order\n",
                                     l.id);
        }
        if (criterion == Criterion::Product) {
            const auto w = l.weight.values();
            for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::fabs(w[k]) * g[k];
        }
        SensitivityBuilder::add(map, l.id, std::move(g));
    }
    return map;
}

}  // namespace

SensitivityMap score_magnitude(const Network& net, CostLedger* ledger) {
    require_prunable(net);
    if (ledger) ledger->add_sensitivity_call();
    SensitivityMap map = SensitivityBuilder::make(Criterion::Magnitude, "");
    for (const Layer& l : net.layers()) {
        if (l.prunable()) SensitivityBuilder::add(map, l.id, abs_values(l.weight.values()));
    }
    return map;
}

SensitivityMap score_gradient(const Network& net, const DatasetSplit& calibration, std::size_t batch_size,
                              std::uint64_t seed, CostLedger* ledger) {
    if (ledger) ledger->add_sensitivity_call();
    return gradient_map(net, calibration, batch_size, seed, Criterion::Gradient);
}

SensitivityMap score_product(const Network& net, const DatasetSplit& calibration, std::size_t batch_size,
                             std::uint64_t seed, CostLedger* ledger) {
    if (ledger) ledger->add_sensitivity_call();
    return gradient_map(net, calibration, batch_size, seed, Criterion::Product);
}

SensitivityMap compute_sensitivity(const Network& net, Criterion criterion, const DatasetSplit* calibration,
                                   std::size_t batch_size, std::uint64_t seed, CostLedger* ledger) {
    if (criterion == Criterion::Magnitude) return score_magnitude(net, ledger);
    if (!calibration) throw ConfigError(fmt::format("{} sensitivity needs calibration data", to_string(criterion)));
    return criterion == Criterion::Gradient ? score_gradient(net, *calibration, batch_size, seed, ledger)
                                            : score_product(net, *calibration, batch_size, seed, ledger);
}

std::string fingerprint(const SensitivityMap& map) {
    Sha256 h;
    h.update(to_string(map.criterion()));
    h.update_u64(map.calibration_fingerprint().size());
    h.update(map.calibration_fingerprint());
    for (int id : map.layer_ids()) {
        const auto s = map.scores(id);
        h.update_u64(static_cast<std::uint64_t>(id));
        h.update_u64(s.size());
        h.update(s);
    }
    return h.hex();
}

std::string sensitivity_summary_csv(const SensitivityMap& map) {
    std::string out = "layer_id,count,min,mean,max,zero_gradient\n";
    const auto& zero = map.zero_gradient_layers();
    for (int id : map.layer_ids()) {
        const auto s = map.scores(id);
        double sum = 0.0;
        float lo = s.empty() ? 0.0f : s[0], hi = lo;
        for (float v : s) {
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const bool zg = std::find(zero.begin(), zero.end(), id) != zero.end();
        out += fmt::format("{},{},{:.9g},{:.9g},{:.9g},{}\n", id, s.size(), lo, s.empty() ? 0.0 : sum / s.size(), hi,
                           zg ? 1 : 0);
    }
    return out;
}

}  // namespace mixprune
