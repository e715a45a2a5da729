#include "mixprune/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <set>

#include <fmt/format.h>

#include "mixprune/errors.hpp"

namespace mixprune {

namespace {

void check_ranges(std::span<const LayerRange> ranges) {
    if (ranges.empty()) throw ConfigError("no layer ranges to build strategies from");
}

void check_matches(std::span<const LayerRange> ranges, const Network& net) {
    check_ranges(ranges);
    if (ranges.size() != net.layer_count()) throw ConfigError("range list does not match the model");
}

std::string_view interpolated_name(double alpha) {
    for (std::size_t k = 0; k < kInterpolationAlphas.size(); ++k)
        if (alpha == kInterpolationAlphas[k]) return kStrategyNames[3 + k];
    return {};
}

}  // namespace

std::size_t strategy_ordinal(std::string_view name) {
    const auto it = std::find(kStrategyNames.begin(), kStrategyNames.end(), name);
    if (it == kStrategyNames.end()) throw InputError(fmt::format("unknown strategy '{}'", name));
    return static_cast<std::size_t>(it - kStrategyNames.begin());
}

double interpolate(const LayerRange& range, double alpha) {
    const double rho = range.rho_min + alpha * (range.rho_max - range.rho_min);
    return std::clamp(rho, range.rho_min, range.rho_max);
}

double proportional_beta(std::size_t weights, double average_weights) {
    return std::min(1.0, static_cast<double>(weights) / average_weights * 0.1);
}

double average_prunable_weights(const Network& net) {
    std::size_t total = 0, count = 0;
    for (const Layer& l : net.layers()) {
        if (!l.prunable()) continue;
        total += l.weight_count();
        ++count;
    }
    if (count == 0) throw ConfigError("model has no prunable layers");
    return static_cast<double>(total) / static_cast<double>(count);
}

std::array<StrategyVector, 3> core_strategies(std::span<const LayerRange> ranges) {
    check_ranges(ranges);
    std::array<StrategyVector, 3> out{StrategyVector{std::string(kStrategyNames[0]), {}},
                                      StrategyVector{std::string(kStrategyNames[1]), {}},
                                      StrategyVector{std::string(kStrategyNames[2]), {}}};
    for (const LayerRange& r : ranges) {
        out[0].rho.push_back(r.rho_max);
        out[1].rho.push_back(r.rho_min);
        out[2].rho.push_back((r.rho_min + r.rho_max) / 2.0);
    }
    return out;
}

StrategyVector interpolated_strategy(std::span<const LayerRange> ranges, double alpha) {
    check_ranges(ranges);
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError(fmt::format("interpolation alpha {} outside [0, 1]", alpha));
    const std::string_view known = interpolated_name(alpha);
    StrategyVector s{known.empty() ? fmt::format("Interpolated-{}", alpha) : std::string(known), {}};
    for (const LayerRange& r : ranges) s.rho.push_back(interpolate(r, alpha));
    return s;
}

StrategyVector parameter_proportional(std::span<const LayerRange> ranges, const Network& net) {
    check_matches(ranges, net);
    const double avg = average_prunable_weights(net);
    StrategyVector s{std::string(kStrategyNames[7]), {}};
    for (std::size_t i = 0; i < ranges.size(); ++i)
        s.rho.push_back(interpolate(ranges[i], proportional_beta(net.layer(i).weight_count(), avg)));
    return s;
}

StrategyVector structure_aware(std::span<const LayerRange> ranges, const Network& net, StructureVariant variant,
                               const StructureCoefficients& coeffs) {
    check_matches(ranges, net);
    for (double a : {coeffs.aggressive, coeffs.conservative}) {
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError(fmt::format("structure coefficient {} outside [0, 1]", a));
    }
    const bool classifier = variant == StructureVariant::ClassifierHeavy;
    StrategyVector s{std::string(kStrategyNames[classifier ? 8 : 9]), {}};
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        const Layer& l = net.layer(i);
        const bool favoured =
            classifier ? l.role == LayerRole::ClassifierHead ||
                             (l.role == LayerRole::Dense && l.depth_fraction >= coeffs.classifier_depth)
                       : l.role == LayerRole::Conv2D || l.role == LayerRole::PatchEmbedding;
        s.rho.push_back(interpolate(ranges[i], favoured ? coeffs.aggressive : coeffs.conservative));
    }
    return s;
}

const StrategyVector& StrategySet::find(std::string_view name) const {
    for (const auto& s : strategies)
        if (s.name == name) return s;
    throw InputError(fmt::format("strategy '{}' not in set", name));
}

StrategySet build_strategy_set(std::span<const LayerRange> ranges, const Network& net,
                               const StructureCoefficients& coeffs, CostLedger* ledger) {
    check_matches(ranges, net);
    StrategySet set;
    for (auto& s : core_strategies(ranges)) set.strategies.push_back(std::move(s));
    for (double alpha : kInterpolationAlphas) set.strategies.push_back(interpolated_strategy(ranges, alpha));
    set.strategies.push_back(parameter_proportional(ranges, net));
    set.strategies.push_back(structure_aware(ranges, net, StructureVariant::ClassifierHeavy, coeffs));
    set.strategies.push_back(structure_aware(ranges, net, StructureVariant::FeatureHeavy, coeffs));

    for (const StrategyVector& s : set.strategies) {
        if (ledger) ledger->add_strategy_generation();
        for (std::size_t i = 0; i < ranges.size(); ++i) {
            const double rho = s.rho[i];
            if (!(rho >= ranges[i].rho_min && rho <= ranges[i].rho_max) ||
                (!net.layer(i).prunable() && rho != 0.0)) {
                throw InvariantError(fmt::format("strategy {} assigns {} to layer {} outside [{}, {}]", s.name, rho,
                                                 ranges[i].layer_id, ranges[i].rho_min, ranges[i].rho_max));
            }
        }
    }
    if (std::all_of(ranges.begin(), ranges.end(), [](const LayerRange& r) { return r.rho_min == r.rho_max; })) {
        set.warnings.push_back("every layer range has zero width; all ten strategies coincide");
    }
    for (const auto& w : set.warnings) std::cerr << "warning: " << w << '\n';
    return set;
}

std::size_t pruned_count(double rho, std::size_t n) {
    return static_cast<std::size_t>(std::floor(rho * static_cast<double>(n)));
}

double nominal_global_sparsity(const StrategyVector& s, const Network& net) {
    std::size_t pruned = 0, total = 0;
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& l = net.layer(i);
        if (!l.prunable()) continue;
        pruned += pruned_count(s.rho.at(i), l.weight_count());
        total += l.weight_count();
    }
    return total ? 100.0 * static_cast<double>(pruned) / static_cast<double>(total) : 0.0;
}

std::string strategies_to_csv(const StrategySet& set, const Network& net) {
    std::string out = "strategy";
    for (const Layer& l : net.layers()) out += fmt::format(",layer_{}", l.id);
    out += ",nominal_global_sparsity_pct\n";
    for (const StrategyVector& s : set.strategies) {
        out += s.name;
        for (double r : s.rho) out += fmt::format(",{:.6f}", r);
        out += fmt::format(",{:.2f}\n", nominal_global_sparsity(s, net));
    }
    return out;
}

}  // namespace mixprune
