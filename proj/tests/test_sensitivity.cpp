#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixprune/errors.hpp"
#include "mixprune/sensitivity.hpp"
#include "oracle.hpp"
#include "testnets.hpp"

using namespace mixprune;

namespace {

DatasetSplit calibration_for(const Network& net, std::size_t n, std::uint64_t seed) {
    DatasetSplit d;
    d.inputs = testnets::random_inputs(n, net.input_features(), seed);
    d.labels = testnets::random_labels(n, net.classes(), seed + 1);
    d.tag = SplitTag::Calibration;
    return d;
}

}  // namespace

TEST(Sensitivity, MagnitudeIsAbsoluteWeight) {
    std::vector<Layer> layers;
    layers.push_back(testnets::dense(LayerRole::ClassifierHead, 3, 1));
    Network net({3}, 1, std::move(layers));
    net.layer(0).weight = Tensor({1, 3}, {-2.0f, 0.5f, 0.0f});
    const SensitivityMap m = score_magnitude(net);
    const auto s = m.scores(1);
    EXPECT_EQ(std::vector<float>(s.begin(), s.end()), (std::vector<float>{2.0f, 0.5f, 0.0f}));
    EXPECT_TRUE(m.calibration_fingerprint().empty());
}

TEST(Sensitivity, NormalizationLayersAreNotScored) {
    const Network net = testnets::tiny_mlp(1);
    const SensitivityMap m = score_magnitude(net);
    EXPECT_EQ(m.layer_ids(), (std::vector<int>{1, 3, 4}));
    EXPECT_FALSE(m.has_layer(2));
    EXPECT_THROW(m.scores(2), InputError);
}

TEST(Sensitivity, MagnitudeRankingInvariantToPositiveScaling) {
    Network net = testnets::tiny_conv(5);
    const auto rank = [](std::span<const float> s) {
        std::vector<std::size_t> idx(s.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
        return idx;
    };
    const auto before = rank(score_magnitude(net).scores(3));
    for (float& w : net.layer(2).weight.values()) w *= 3.0f;
    EXPECT_EQ(rank(score_magnitude(net).scores(3)), before);
}

TEST(Sensitivity, GradientMatchesFiniteDifferenceOverCalibrationSet) {
    const Network net = testnets::tiny_mlp(8);
    const std::size_t n = 10;
    const std::uint64_t seed = testnets::kink_free_seed(net, n, 3e-3, 100);
    DatasetSplit cal = calibration_for(net, n, seed);
    cal.labels = testnets::random_labels(n, net.classes(), 77);
    // Batches of 4 leave a short last batch of 2.
    const SensitivityMap m = score_gradient(net, cal, 4, 0);
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& l = net.layer(i);
        if (!l.prunable()) continue;
        const auto s = m.scores(l.id);
        for (std::size_t k = 0; k < s.size(); ++k) {
            const double fd = std::abs(oracle::fd_gradient(net, cal.inputs, cal.labels, i, false, k, 1e-3));
            EXPECT_LE(std::abs(s[k] - fd) / std::max({static_cast<double>(s[k]), fd, 1e-4}), 1e-3)
                << "layer " << l.id << " weight " << k;
        }
    }
}

TEST(Sensitivity, DuplicatedCalibrationSetGivesIdenticalMap) {
    const Network net = testnets::tiny_mlp(2);
    const DatasetSplit cal = calibration_for(net, 12, 3);
    std::vector<std::size_t> rows(24);
    for (std::size_t k = 0; k < 24; ++k) rows[k] = k % 12;
    const DatasetSplit twice = subset(cal, rows, SplitTag::Calibration);
    const SensitivityMap a = score_gradient(net, cal, 12, 0);
    const SensitivityMap b = score_gradient(net, twice, 12, 0);
    for (int id : a.layer_ids()) {
        const auto sa = a.scores(id), sb = b.scores(id);
        EXPECT_TRUE(std::equal(sa.begin(), sa.end(), sb.begin(), sb.end())) << "layer " << id;
    }
}

TEST(Sensitivity, ProductIsExactElementwiseProduct) {
    const Network net = testnets::tiny_patch(4);
    const DatasetSplit cal = calibration_for(net, 9, 5);
    const SensitivityMap mag = score_magnitude(net);
    const SensitivityMap grad = score_gradient(net, cal, 4, 1);
    const SensitivityMap prod = score_product(net, cal, 4, 1);
    for (int id : prod.layer_ids()) {
        const auto m = mag.scores(id), g = grad.scores(id), p = prod.scores(id);
        for (std::size_t k = 0; k < p.size(); ++k) EXPECT_EQ(p[k], m[k] * g[k]);
    }
}

TEST(Sensitivity, ZeroWeightZeroesProductScore) {
    Network net = testnets::tiny_mlp(4);
    net.layer(0).weight[3] = 0.0f;
    const SensitivityMap prod = score_product(net, calibration_for(net, 6, 2), 8, 0);
    EXPECT_EQ(prod.scores(1)[3], 0.0f);
}

TEST(Sensitivity, ScoresAreNonNegative) {
    const Network net = testnets::tiny_conv(6);
    const DatasetSplit cal = calibration_for(net, 5, 8);
    for (Criterion c : {Criterion::Magnitude, Criterion::Gradient, Criterion::Product}) {
        const SensitivityMap m = compute_sensitivity(net, c, &cal, 4, 0);
        for (int id : m.layer_ids())
            for (float v : m.scores(id)) EXPECT_GE(v, 0.0f);
    }
}

TEST(Sensitivity, ZeroGradientLayersAreReported) {
    Network net = testnets::tiny_mlp(4);
    std::fill(net.layer(3).weight.values().begin(), net.layer(3).weight.values().end(), 0.0f);
    const SensitivityMap m = score_gradient(net, calibration_for(net, 6, 2), 8, 0);
    EXPECT_EQ(m.zero_gradient_layers(), (std::vector<int>{1, 3}));
}

TEST(Sensitivity, EmptyCalibrationIsAConfigError) {
    const Network net = testnets::tiny_mlp(4);
    DatasetSplit empty;
    empty.inputs = Tensor({0, 3});
    EXPECT_THROW(score_gradient(net, empty, 8, 0), ConfigError);
    EXPECT_THROW(compute_sensitivity(net, Criterion::Product, nullptr, 8, 0), ConfigError);
}

TEST(Sensitivity, EachScoringCallCountsOnce) {
    const Network net = testnets::tiny_mlp(4);
    const DatasetSplit cal = calibration_for(net, 6, 2);
    CostLedger ledger;
    (void)compute_sensitivity(net, Criterion::Product, &cal, 4, 0, &ledger);
    EXPECT_EQ(ledger.snapshot().sensitivity_calls, 1u);
    (void)score_magnitude(net, &ledger);
    EXPECT_EQ(ledger.snapshot().sensitivity_calls, 2u);
}

TEST(Sensitivity, FingerprintIsStableAndCriterionSensitive) {
    const Network net = testnets::tiny_mlp(4);
    const DatasetSplit cal = calibration_for(net, 6, 2);
    EXPECT_EQ(fingerprint(score_gradient(net, cal, 4, 3)), fingerprint(score_gradient(net, cal, 4, 3)));
    EXPECT_NE(fingerprint(score_gradient(net, cal, 4, 3)), fingerprint(score_gradient(net, cal, 4, 4)));
    EXPECT_NE(fingerprint(score_gradient(net, cal, 4, 3)), fingerprint(score_product(net, cal, 4, 3)));
    EXPECT_NE(score_gradient(net, cal, 4, 3).calibration_fingerprint().find(":3"), std::string::npos);
}

TEST(Sensitivity, ParsesCriterionNames) {
    EXPECT_EQ(parse_criterion("product"), Criterion::Product);
    EXPECT_THROW(parse_criterion("hessian"), ConfigError);
}
