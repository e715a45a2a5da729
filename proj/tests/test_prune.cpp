#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mixprune/prune.hpp"
#include "oracle.hpp"
#include "testnets.hpp"

using namespace mixprune;

namespace {

Layer row(std::size_t n) { return testnets::dense(LayerRole::Dense, n, 1); }

// Label is the index of the largest input coordinate.
DatasetSplit argmax_split(std::size_t n, std::uint64_t seed, SplitTag tag) {
    DatasetSplit d;
    d.inputs = testnets::random_inputs(n, 3, seed);
    d.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const float* x = d.inputs.data() + 3 * i;
        d.labels[i] = static_cast<std::int32_t>(std::max_element(x, x + 3) - x);
    }
    d.tag = tag;
    return d;
}

DataSplits tiny_data() {
    DataSplits s;
    s.train = argmax_split(120, 1, SplitTag::Train);
    s.calibration = argmax_split(12, 2, SplitTag::Calibration);
    s.validation = argmax_split(40, 3, SplitTag::Validation);
    s.test = argmax_split(40, 4, SplitTag::Test);
    return s;
}

RunConfig quick_config() {
    RunConfig c;
    c.fine_tune.max_epochs = 6;
    c.fine_tune.patience = 6;
    c.fine_tune.batch_size = 16;
    c.fine_tune.optimizer.learning_rate = 1e-2;
    c.seed = 5;
    return c;
}

StrategySet tiny_set(const Network& net) {
    std::vector<LayerRange> r{{1, 0.3, 0.7, "t"}, {2, 0.0, 0.0, "t"}, {3, 0.1, 0.5, "t"}, {4, 0.2, 0.6, "t"}};
    return build_strategy_set(r, net);
}

bool positive_zero(float v) { return v == 0.0f && !std::signbit(v); }

}  // namespace

TEST(Prune, MaskExample) {
    const Layer l = row(4);
    const std::vector<float> s{3, 1, 2, 4};
    EXPECT_EQ(build_mask(l, s, 0.5).keep, (std::vector<std::uint8_t>{1, 0, 0, 1}));
}

TEST(Prune, TiesGoToTheLowestIndex) {
    const Layer l = row(5);
    const std::vector<float> s{1, 1, 1, 1, 1};
    EXPECT_EQ(build_mask(l, s, 0.6).keep, (std::vector<std::uint8_t>{0, 0, 0, 1, 1}));
}

TEST(Prune, MaskMatchesFullSortOracle) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng() % 64;
        std::vector<float> s(n);
        const bool coarse = trial % 3 == 0;
        for (float& v : s) v = coarse ? static_cast<float>(rng() % 3) : std::uniform_real_distribution<float>(0, 1)(rng);
        const double rho = std::uniform_real_distribution<double>(0, 1)(rng);
        const LayerMask m = build_mask(row(n), s, rho);
        const std::size_t k = static_cast<std::size_t>(std::floor(rho * static_cast<double>(n)));
        EXPECT_EQ(m.pruned(), k);
        EXPECT_EQ(m.keep, oracle::mask_by_sort(s, k));
    }
}

TEST(Prune, MaskRejectsBadInput) {
    const std::vector<float> s{1, 2};
    EXPECT_THROW(build_mask(row(3), s, 0.5), ShapeError);
    EXPECT_THROW(build_mask(row(2), s, 1.5), ConfigError);
    EXPECT_EQ(build_mask(row(2), s, 1.0).pruned(), 2u);
}

TEST(Prune, ApplyIsIdempotentAndWritesPositiveZero) {
    Network net = testnets::tiny_mlp(3);
    for (float& w : net.layer(0).weight.values()) w = -std::abs(w);
    const SensitivityMap map = score_magnitude(net);
    StrategyVector sv{"x", {0.5, 0.0, 0.5, 0.5}};
    const PruneMask m = build_masks(net, map, sv);
    apply_mask(net, m);
    const Network once = net;
    apply_mask(net, m);
    for (std::size_t i = 0; i < net.layer_count(); ++i) EXPECT_TRUE(net.layer(i).weight.bit_equal(once.layer(i).weight));
    for (std::size_t k = 0; k < m.layers[0].keep.size(); ++k)
        if (!m.layers[0].keep[k]) EXPECT_TRUE(positive_zero(net.layer(0).weight[k]));
}

TEST(Prune, MaskedWeightsStayZeroThroughFineTuning) {
    const Network net = testnets::tiny_mlp(3);
    const DataSplits data = tiny_data();
    const StrategyVector sv{"x", {0.5, 0.0, 0.5, 0.6}};
    const PruneMask m = build_masks(net, score_magnitude(net), sv);
    FineTuneConfig cfg = quick_config().fine_tune;
    const FineTuneOutcome out = fine_tune(net, m, data.train, data.validation, cfg, 1);
    EXPECT_EQ(out.epochs_used, 6u);
    EXPECT_GT(out.optimizer_steps, 0u);
    for (const LayerMask& lm : m.layers) {
        const Layer& l = out.model.layer(static_cast<std::size_t>(lm.layer_id - 1));
        for (std::size_t k = 0; k < lm.keep.size(); ++k)
            if (!lm.keep[k]) EXPECT_TRUE(positive_zero(l.weight[k])) << lm.layer_id << ":" << k;
    }
}

TEST(Prune, ZeroLearningRateStopsAfterPatience) {
    const Network net = testnets::tiny_mlp(3);
    const DataSplits data = tiny_data();
    FineTuneConfig cfg = quick_config().fine_tune;
    cfg.optimizer.learning_rate = 0.0;
    cfg.patience = 2;
    cfg.max_epochs = 20;
    const FineTuneOutcome out = fine_tune(net, PruneMask{}, data.train, data.validation, cfg, 1);
    EXPECT_LE(out.epochs_used, cfg.patience + 1);
    EXPECT_TRUE(out.early_stopped);
}

TEST(Prune, ZeroEpochsReturnsTheMaskedModel) {
    const Network net = testnets::tiny_mlp(3);
    const DataSplits data = tiny_data();
    FineTuneConfig cfg = quick_config().fine_tune;
    cfg.max_epochs = 0;
    const PruneMask m = build_masks(net, score_magnitude(net), StrategyVector{"x", {0.5, 0.0, 0.5, 0.5}});
    const FineTuneOutcome out = fine_tune(net, m, data.train, data.validation, cfg, 1);
    EXPECT_EQ(out.epochs_used, 0u);
    Network masked = net;
    apply_mask(masked, m);
    EXPECT_TRUE(out.model.layer(0).weight.bit_equal(masked.layer(0).weight));
}

TEST(Prune, StrategySeedIsRunSeedPlusOrdinal) {
    EXPECT_EQ(strategy_seed(100, "Max-Aggressive"), 100u);
    EXPECT_EQ(strategy_seed(100, "Feature-Heavy"), 109u);
}

TEST(Prune, RunAllIsOrderIndependentAndLeavesBaseAlone) {
    const Network net = testnets::tiny_mlp(3);
    const Network copy = net;
    const DataSplits data = tiny_data();
    const SensitivityMap map = score_magnitude(net);
    const StrategySet set = tiny_set(net);
    const RunConfig cfg = quick_config();
    CostLedger l1, l2;
    const auto a = run_all_strategies(net, map, set, data, cfg, 90.0, l1);
    const std::vector<std::size_t> reversed{9, 8, 7, 6, 5, 4, 3, 2, 1, 0};
    RunConfig par = cfg;
    par.parallel = 3;
    const auto b = run_all_strategies(net, map, set, data, par, 90.0, l2, reversed);
    EXPECT_EQ(l1.snapshot().finetune_runs, 10u);
    EXPECT_EQ(l2.snapshot().mask_builds, 30u);
    for (std::size_t i = 0; i < 10; ++i) {
        ASSERT_TRUE(a[i].model && b[i].model);
        EXPECT_EQ(a[i].report.strategy, set.strategies[i].name);
        EXPECT_EQ(a[i].report.accuracy_pct, b[i].report.accuracy_pct);
        EXPECT_EQ(a[i].report.pareto, b[i].report.pareto);
        for (std::size_t j = 0; j < net.layer_count(); ++j)
            EXPECT_TRUE(a[i].model->layer(j).weight.bit_equal(b[i].model->layer(j).weight));
    }
    for (std::size_t j = 0; j < net.layer_count(); ++j) EXPECT_TRUE(net.layer(j).weight.bit_equal(copy.layer(j).weight));
    EXPECT_THROW(run_all_strategies(net, map, set, data, cfg, 90.0, l1, std::vector<std::size_t>{0, 0}), InputError);
}

TEST(Prune, FailingStrategyIsIsolated) {
    const Network net = testnets::tiny_mlp(3);
    const DataSplits data = tiny_data();
    StrategySet set = tiny_set(net);
    set.strategies[4].rho[0] = 1.5;
    CostLedger ledger;
    const auto r = run_all_strategies(net, score_magnitude(net), set, data, quick_config(), 90.0, ledger);
    EXPECT_TRUE(r[4].report.failed);
    EXPECT_FALSE(r[4].model.has_value());
    EXPECT_FALSE(r[4].report.pareto);
    EXPECT_FALSE(r[4].report.error.empty());
    for (std::size_t i = 0; i < 10; ++i)
        if (i != 4) EXPECT_FALSE(r[i].report.failed) << i;
}

TEST(Prune, DivergenceIsReportedWithLocation) {
    Network net = testnets::tiny_mlp(3);
    DataSplits data = tiny_data();
    data.train.inputs[0] = std::numeric_limits<float>::infinity();
    try {
        (void)fine_tune(net, PruneMask{}, data.train, data.validation, quick_config().fine_tune, 1);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.epoch(), 1u);
        EXPECT_GE(e.step(), 1u);
    }
}
