#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "mixprune/errors.hpp"
#include "mixprune/strategies.hpp"
#include "testnets.hpp"

using namespace mixprune;

namespace {

// Dense chain with the given weight counts: layer k maps widths[k] -> widths[k+1].
Network chain(const std::vector<std::size_t>& widths, LayerRole last = LayerRole::ClassifierHead) {
    std::vector<Layer> layers;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k)
        layers.push_back(testnets::dense(k + 2 == widths.size() ? last : LayerRole::Dense, widths[k], widths[k + 1]));
    return Network({widths.front()}, widths.back(), std::move(layers));
}

std::vector<LayerRange> ranges_of(const std::vector<std::pair<double, double>>& rs) {
    std::vector<LayerRange> out;
    int id = 1;
    for (auto [lo, hi] : rs) out.push_back({id++, lo, hi, "test"});
    return out;
}

}  // namespace

TEST(Strategies, CoreStrategies) {
    const auto s = core_strategies(ranges_of({{0.3, 0.7}, {0.0, 0.0}}));
    EXPECT_EQ(s[0].name, "Max-Aggressive");
    EXPECT_DOUBLE_EQ(s[0].rho[0], 0.7);
    EXPECT_DOUBLE_EQ(s[1].rho[0], 0.3);
    EXPECT_DOUBLE_EQ(s[2].rho[0], 0.5);
    for (const auto& v : s) EXPECT_EQ(v.rho[1], 0.0);
}

TEST(Strategies, InterpolationEndpointsAndExamples) {
    const auto r = ranges_of({{0.15, 0.30}, {0.3, 0.7}, {0.6, 0.95}});
    const auto lo = interpolated_strategy(r, 0.0);
    const auto min = core_strategies(r)[1];
    EXPECT_EQ(lo.rho, min.rho);
    EXPECT_NEAR(interpolated_strategy(r, 0.9).rho[0], 0.285, 1e-12);
    EXPECT_EQ(interpolated_strategy(r, 0.9).name, "Upper-90th-Percentile");
    const auto mid = interpolated_strategy(r, 0.5);
    const auto balanced = core_strategies(r)[2];
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(mid.rho[i], balanced.rho[i], 1e-15);
    EXPECT_EQ(interpolated_strategy(r, 0.25).name, "Interpolated-0.25");
    EXPECT_THROW(interpolated_strategy(r, 1.5), ConfigError);
}

TEST(Strategies, InterpolationIsMonotoneInAlpha) {
    const auto r = ranges_of({{0.15, 0.30}, {0.3, 0.7}, {0.0, 0.1}, {0.0, 0.0}});
    for (double a = 0.0; a < 1.0; a += 0.05) {
        const auto x = interpolated_strategy(r, a), y = interpolated_strategy(r, std::min(1.0, a + 0.05));
        for (std::size_t i = 0; i < r.size(); ++i) EXPECT_LE(x.rho[i], y.rho[i]);
    }
}

TEST(Strategies, BetaMatchesHandComputedOracle) {
    // counts 100, 1000, 8900; average 10000 / 3
    const Network net = chain({1, 100, 10, 890});
    ASSERT_EQ(net.layer(2).weight_count(), 8900u);
    const double avg = 10000.0 / 3.0;
    EXPECT_NEAR(average_prunable_weights(net), avg, 1e-9);
    const double expected[] = {0.003, 0.03, 0.267};  // n / avg * 0.1, all under the clamp
    const auto r = ranges_of({{0.0, 0.1}, {0.0, 0.1}, {0.5, 0.9}});
    const auto s = parameter_proportional(r, net);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(proportional_beta(net.layer(i).weight_count(), avg), expected[i], 1e-9);
        EXPECT_NEAR(s.rho[i], r[i].rho_min + expected[i] * (r[i].rho_max - r[i].rho_min), 1e-9);
    }
}

TEST(Strategies, BetaClamp) {
    EXPECT_DOUBLE_EQ(proportional_beta(500, 500.0), 0.1);
    EXPECT_DOUBLE_EQ(proportional_beta(5000, 500.0), 1.0);
    EXPECT_DOUBLE_EQ(proportional_beta(90000, 500.0), 1.0);
}

TEST(Strategies, StructureAwareExamples) {
    const Network net = chain({4, 30, 400});  // Dense 120, Classifier 12000
    const auto r = ranges_of({{0.3, 0.7}, {0.6, 0.95}});
    const auto ch = structure_aware(r, net, StructureVariant::ClassifierHeavy);
    const auto fh = structure_aware(r, net, StructureVariant::FeatureHeavy);
    EXPECT_NEAR(ch.rho[1], 0.915, 1e-12);
    EXPECT_NEAR(fh.rho[1], 0.705, 1e-12);
    EXPECT_NEAR(ch.rho[0], 0.42, 1e-12);
    EXPECT_EQ(ch.name, "Classifier-Heavy");
    EXPECT_EQ(fh.name, "Feature-Heavy");
}

TEST(Strategies, ClassifierHeavyFavoursDeepDense) {
    const Network net = chain({4, 8, 8, 8, 8, 8, 2}, LayerRole::Dense);  // depths 0, .2, .4, .6, .8, 1
    const auto r = ranges_of({{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}});
    const auto s = structure_aware(r, net, StructureVariant::ClassifierHeavy);
    EXPECT_EQ(s.rho, (std::vector<double>{0.3, 0.3, 0.3, 0.3, 0.9, 0.9}));
}

TEST(Strategies, SetOrderContainmentAndSandwich) {
    const Network net = testnets::tiny_mlp(1);
    const auto r = ranges_of({{0.3, 0.7}, {0.0, 0.0}, {0.1, 0.5}, {0.6, 0.95}});
    CostLedger ledger;
    const StrategySet set = build_strategy_set(r, net, {}, &ledger);
    ASSERT_EQ(set.strategies.size(), 10u);
    EXPECT_EQ(ledger.snapshot().strategy_generations, 10u);
    for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(set.strategies[k].name, kStrategyNames[k]);
    const auto& max = set.find("Max-Aggressive").rho;
    const auto& min = set.find("Min-Conservative").rho;
    for (const auto& s : set.strategies)
        for (std::size_t i = 0; i < r.size(); ++i) {
            EXPECT_GE(s.rho[i], r[i].rho_min);
            EXPECT_LE(s.rho[i], r[i].rho_max);
            EXPECT_LE(min[i], s.rho[i]);
            EXPECT_LE(s.rho[i], max[i]);
        }
    EXPECT_EQ(set.strategies[0].rho[1], 0.0);
    EXPECT_THROW(set.find("Random"), InputError);
}

TEST(Strategies, ZeroWidthRangesCoincideWithWarning) {
    const Network net = testnets::tiny_mlp(1);
    const StrategySet set = build_strategy_set(ranges_of({{0.2, 0.2}, {0, 0}, {0.4, 0.4}, {0.1, 0.1}}), net);
    ASSERT_EQ(set.warnings.size(), 1u);
    for (const auto& s : set.strategies) EXPECT_EQ(s.rho, set.strategies[0].rho);
}

TEST(Strategies, HomogeneousModelGivesSeveralDistinctSparsities) {
    const Network net = chain({120, 120, 120, 120, 120});
    const auto r = ranges_of({{0.5, 0.9}, {0.5, 0.9}, {0.5, 0.9}, {0.6, 0.95}});
    const StrategySet set = build_strategy_set(r, net);
    std::set<double> distinct;
    for (const auto& s : set.strategies) distinct.insert(nominal_global_sparsity(s, net));
    EXPECT_GE(distinct.size(), 3u);
}

TEST(Strategies, VggLikeOrdering) {
    Layer c1, c2, c3;
    for (auto* c : {&c1, &c2, &c3}) {
        c->role = LayerRole::Conv2D;
        c->padding = 1;
    }
    c1.weight = Tensor({16, 3, 3, 3});
    c2.weight = Tensor({64, 16, 3, 3});
    c3.weight = Tensor({64, 64, 3, 3});
    std::vector<Layer> layers{c1, c2, c3, testnets::dense(LayerRole::Dense, 64 * 16, 256),
                              testnets::dense(LayerRole::ClassifierHead, 256, 10)};
    const Network net({3, 4, 4}, 10, std::move(layers));
    const auto ranges = assign_ranges(net, default_rule_table());
    const StrategySet set = build_strategy_set(ranges, net);
    const double max = nominal_global_sparsity(set.find("Max-Aggressive"), net);
    const double u90 = nominal_global_sparsity(set.find("Upper-90th-Percentile"), net);
    const double u70 = nominal_global_sparsity(set.find("Upper-70th-Percentile"), net);
    EXPECT_GT(max, u90);
    EXPECT_GT(u90, u70);
    EXPECT_GT(max, 80.0);
}

TEST(Strategies, PrunedCountIsFloor) {
    EXPECT_EQ(pruned_count(0.5, 7), 3u);
    EXPECT_EQ(pruned_count(0.0, 7), 0u);
    EXPECT_EQ(pruned_count(1.0, 7), 7u);
    EXPECT_EQ(pruned_count(0.999, 1000), 999u);
}

TEST(Strategies, OrdinalsAndCsv) {
    EXPECT_EQ(strategy_ordinal("Max-Aggressive"), 0u);
    EXPECT_EQ(strategy_ordinal("Feature-Heavy"), 9u);
    EXPECT_THROW(strategy_ordinal("FC-Heavy"), InputError);
    const Network net = testnets::tiny_mlp(1);
    const StrategySet set = build_strategy_set(ranges_of({{0.3, 0.7}, {0, 0}, {0.1, 0.5}, {0.6, 0.95}}), net);
    const std::string csv = strategies_to_csv(set, net);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 11);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "strategy,layer_1,layer_2,layer_3,layer_4,nominal_global_sparsity_pct");
}
