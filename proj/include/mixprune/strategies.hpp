#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixprune/cost_ledger.hpp"
#include "mixprune/network.hpp"
#include "mixprune/ranges.hpp"

namespace mixprune {

// The ten strategy names in generation order. A strategy's ordinal is its
// index here; per-strategy seeds derive from it.
inline constexpr std::array<std::string_view, 10> kStrategyNames{
    "Max-Aggressive",         "Min-Conservative",      "Balanced",
    "Lower-30th-Percentile",  "Middle-50th-Percentile", "Upper-70th-Percentile",
    "Upper-90th-Percentile",  "Parameter-Proportional", "Classifier-Heavy",
    "Feature-Heavy",
};

inline constexpr std::array<double, 4> kInterpolationAlphas{0.3, 0.5, 0.7, 0.9};

// Throws InputError for names outside kStrategyNames.
std::size_t strategy_ordinal(std::string_view name);

// Layer-wise sparsity fractions, indexed like Network::layers().
struct StrategyVector {
    std::string name;
    std::vector<double> rho;
};

enum class StructureVariant { ClassifierHeavy, FeatureHeavy };

// Coefficients of the two structure-aware variants. A layer favoured by the
// variant interpolates at `aggressive`, every other layer at `conservative`.
// Classifier-Heavy favours ClassifierHead layers and Dense layers at depth
// >= `classifier_depth`; Feature-Heavy favours Conv2D and PatchEmbedding.
struct StructureCoefficients {
    double aggressive = 0.9;
    double conservative = 0.3;
    double classifier_depth = 0.8;
};

// rho_min + alpha * (rho_max - rho_min), clamped into the range against
// rounding at the endpoints.
double interpolate(const LayerRange& range, double alpha);

// min(1, weights / average_weights * 0.1)
double proportional_beta(std::size_t weights, double average_weights);

// Mean weight count over prunable layers.
double average_prunable_weights(const Network& net);

// Max-Aggressive, Min-Conservative, Balanced.
std::array<StrategyVector, 3> core_strategies(std::span<const LayerRange> ranges);

// Throws ConfigError unless alpha is in [0, 1]. The four standard alphas get
// their percentile names; other alphas are named "Interpolated-<alpha>".
StrategyVector interpolated_strategy(std::span<const LayerRange> ranges, double alpha);

StrategyVector parameter_proportional(std::span<const LayerRange> ranges, const Network& net);

StrategyVector structure_aware(std::span<const LayerRange> ranges, const Network& net, StructureVariant variant,
                               const StructureCoefficients& coeffs = {});

struct StrategySet {
    std::vector<StrategyVector> strategies;  // kStrategyNames order
    std::vector<std::string> warnings;

    const StrategyVector& find(std::string_view name) const;
};

// All ten vectors, each checked against its ranges. A vector escaping its
// range raises InvariantError. Counts one strategy generation per vector.
StrategySet build_strategy_set(std::span<const LayerRange> ranges, const Network& net,
                               const StructureCoefficients& coeffs = {}, CostLedger* ledger = nullptr);

// Number of weights a fraction prunes from a layer of n weights: floor(rho * n).
std::size_t pruned_count(double rho, std::size_t n);

// Percent of prunable weights a strategy removes once discretised per layer.
double nominal_global_sparsity(const StrategyVector& s, const Network& net);

// Strategy x layer matrix of rho values.
std::string strategies_to_csv(const StrategySet& set, const Network& net);

}  // namespace mixprune
