#include <gtest/gtest.h>

#include <set>

#include "mixprune/errors.hpp"
#include "mixprune/ranges.hpp"
#include "mixprune/report.hpp"
#include "mixprune/toy.hpp"

using namespace mixprune;

namespace {

ToySpec spec(ToyArchitecture arch, ToyDataset data, std::size_t samples = 400) {
    ToySpec s;
    s.architecture = arch;
    s.dataset = data;
    s.samples = samples;
    return s;
}

}  // namespace

TEST(Toy, BuildIsDeterministic) {
    const ToyBundle a = build_toy(spec(ToyArchitecture::Mlp4WithNorm, ToyDataset::TwoRings), 3);
    const ToyBundle b = build_toy(spec(ToyArchitecture::Mlp4WithNorm, ToyDataset::TwoRings), 3);
    for (std::size_t i = 0; i < a.model.layer_count(); ++i) {
        EXPECT_TRUE(a.model.layer(i).weight.bit_equal(b.model.layer(i).weight));
        EXPECT_TRUE(a.model.layer(i).running_var.bit_equal(b.model.layer(i).running_var));
    }
    EXPECT_TRUE(a.data.test.inputs.bit_equal(b.data.test.inputs));
    EXPECT_EQ(a.data.calibration.labels, b.data.calibration.labels);
}

TEST(Toy, SplitsAreSixtyTwentyTwenty) {
    const ToyBundle t = build_toy(spec(ToyArchitecture::Mlp2, ToyDataset::TwoRings, 500), 1);
    EXPECT_EQ(t.data.train.size(), 300u);
    EXPECT_EQ(t.data.validation.size(), 100u);
    EXPECT_EQ(t.data.test.size(), 100u);
    EXPECT_EQ(t.data.calibration.size(), 30u);
    std::set<std::size_t> seen;
    for (const auto* s : {&t.data.train, &t.data.validation, &t.data.test})
        for (std::size_t r : s->source_rows) EXPECT_TRUE(seen.insert(r).second) << r;
}

TEST(Toy, ArchitecturesHaveTheDocumentedLayers) {
    const auto roles = [](const Network& n) {
        std::vector<LayerRole> r;
        for (const Layer& l : n.layers()) r.push_back(l.role);
        return r;
    };
    using R = LayerRole;
    EXPECT_EQ(roles(build_toy(spec(ToyArchitecture::Mlp2, ToyDataset::TwoRings), 1).model),
              (std::vector<R>{R::Dense, R::Normalization, R::ClassifierHead}));
    EXPECT_EQ(roles(build_toy(spec(ToyArchitecture::Mlp4WithNorm, ToyDataset::TwoRings), 1).model),
              (std::vector<R>{R::Dense, R::Normalization, R::Dense, R::Normalization, R::Dense, R::ClassifierHead}));
    EXPECT_EQ(roles(build_toy(spec(ToyArchitecture::ConvnetSmall, ToyDataset::Blobs), 1).model),
              (std::vector<R>{R::Conv2D, R::Normalization, R::Conv2D, R::Conv2D, R::ClassifierHead}));
    const Network patch = build_toy(spec(ToyArchitecture::PatchMlp, ToyDataset::Blobs), 1).model;
    EXPECT_EQ(roles(patch), (std::vector<R>{R::PatchEmbedding, R::Normalization, R::Dense, R::ClassifierHead}));
    EXPECT_GE(patch.layer(0).weight_count(), 10000u);
}

TEST(Toy, EveryToyObeysTheMandatoryRules) {
    const std::pair<ToyArchitecture, ToyDataset> toys[] = {{ToyArchitecture::Mlp2, ToyDataset::TwoRings},
                                                           {ToyArchitecture::Mlp4WithNorm, ToyDataset::TwoRings},
                                                           {ToyArchitecture::ConvnetSmall, ToyDataset::Blobs},
                                                           {ToyArchitecture::PatchMlp, ToyDataset::Blobs}};
    std::set<std::string> fired;
    for (auto [arch, data] : toys) {
        const Network net = build_toy(spec(arch, data), 2).model;
        const auto r = assign_ranges(net, default_rule_table());
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            const Layer& l = net.layer(i);
            fired.insert(r[i].rule_name);
            if (l.role == LayerRole::Normalization) {
                EXPECT_EQ(r[i].rho_max, 0.0);
            } else if (l.weight_count() < 10000) {
                EXPECT_EQ(r[i].rho_min, 0.0);
                EXPECT_EQ(r[i].rho_max, 0.10);
            } else if (l.role == LayerRole::PatchEmbedding) {
                EXPECT_EQ(r[i].rho_min, 0.15);
                EXPECT_EQ(r[i].rho_max, 0.30);
            }
        }
    }
    // toy classifier heads all sit under 10K weights, so small-layer claims them
    for (const char* rule : {"small-layer", "normalization-unprunable", "patch-embedding", "conv-early", "conv-deep", "dense"})
        EXPECT_TRUE(fired.count(rule)) << rule;
}

TEST(Toy, RejectsInconsistentSpecs) {
    EXPECT_THROW(build_toy(spec(ToyArchitecture::ConvnetSmall, ToyDataset::TwoRings), 1), ConfigError);
    EXPECT_THROW(build_toy(spec(ToyArchitecture::Mlp2, ToyDataset::IdxFile), 1), ConfigError);
    EXPECT_THROW(parse_architecture("resnet"), ConfigError);
    EXPECT_EQ(parse_toy_dataset("two-rings"), ToyDataset::TwoRings);
}

TEST(Toy, TwoRingsGeometry) {
    const DatasetSplit d = make_two_rings(200, 0.0, 4);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double r = std::hypot(d.inputs[2 * i], d.inputs[2 * i + 1]);
        EXPECT_NEAR(r, d.labels[i] == 0 ? 1.0 : 2.0, 1e-5);
        EXPECT_EQ(d.labels[i], static_cast<std::int32_t>(i % 2));
    }
}

TEST(Toy, CalibratedNormalizationStandardisesTheTrainingActivations) {
    const ToyBundle t = build_toy(spec(ToyArchitecture::Mlp2, ToyDataset::TwoRings), 5);
    const auto trace = forward_trace(t.model, t.data.train.inputs);
    const Tensor& in = trace[1];  // input of the normalization layer
    const Layer& norm = t.model.layer(1);
    const std::size_t n = t.data.train.size(), f = norm.weight.size();
    for (std::size_t j = 0; j < f; ++j) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += in[r * f + j];
        mean /= static_cast<double>(n);
        EXPECT_NEAR(norm.running_mean[j], mean, 1e-4 * std::max(1.0, std::abs(mean)));
    }
}

TEST(Toy, SmallMlpLearnsTwoRings) {
    const ToyBundle t = build_toy(spec(ToyArchitecture::Mlp2, ToyDataset::TwoRings, 2000), 7);
    FineTuneConfig cfg = baseline_training_config();
    cfg.max_epochs = 30;
    const FineTuneOutcome out = train_baseline(t.model, t.data, cfg, 7);
    EXPECT_GE(accuracy(out.model, t.data.test), 95.0);
    EXPECT_LE(out.epochs_used, 30u);
}
