#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixprune/config.hpp"
#include "mixprune/cost_ledger.hpp"
#include "mixprune/dataset.hpp"
#include "mixprune/errors.hpp"
#include "mixprune/network.hpp"
#include "mixprune/report.hpp"
#include "mixprune/sensitivity.hpp"
#include "mixprune/strategies.hpp"

namespace mixprune {

// Keep-bits for one layer's weights: 1 kept, 0 pruned.
struct LayerMask {
    int layer_id = 0;
    std::vector<std::uint8_t> keep;

    std::size_t pruned() const noexcept;
};

struct PruneMask {
    std::vector<LayerMask> layers;

    const LayerMask* find(int layer_id) const noexcept;
};

// Prunes exactly floor(rho * n) weights: the lowest scores, ties broken by
// ascending flat index. Throws ShapeError when the scores do not cover the
// weights, ConfigError when rho is outside [0, 1].
LayerMask build_mask(const Layer& layer, std::span<const float> scores, double rho);

// One mask per prunable layer; counts a mask build per layer.
PruneMask build_masks(const Network& net, const SensitivityMap& map, const StrategyVector& strategy,
                      CostLedger* ledger = nullptr);

// Pruned weights become +0.0 exactly; kept weights are left untouched.
void apply_mask(Network& net, const PruneMask& masks);

// Raised when the training loss turns non-finite. Carries where it happened.
class DivergenceError : public NumericError {
  public:
    DivergenceError(int layer_id, std::size_t epoch, std::size_t step, const std::string& what)
        : NumericError(layer_id, what), epoch_(epoch), step_(step) {}
    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t step() const noexcept { return step_; }

  private:
    std::size_t epoch_;
    std::size_t step_;
};

struct FineTuneOutcome {
    Network model;  // best-validation checkpoint
    std::size_t epochs_used = 0;
    double best_validation_accuracy = 0.0;
    bool early_stopped = false;
    std::vector<double> validation_history;
    std::uint64_t optimizer_steps = 0;
};

// Supervised fine-tuning with the masks re-applied after every optimizer step.
// Stops at `max_epochs` or after `patience` consecutive epochs without a
// strictly better validation accuracy. `seed` drives batch shuffling.
FineTuneOutcome fine_tune(Network model, const PruneMask& masks, const DatasetSplit& train,
                          const DatasetSplit& validation, const FineTuneConfig& config, std::uint64_t seed);

struct DataSplits {
    DatasetSplit train;
    DatasetSplit calibration;
    DatasetSplit validation;
    DatasetSplit test;
};

struct StrategyResult {
    StrategyVector strategy;
    PruneMask masks;
    std::optional<Network> model;  // empty when the strategy failed
    PruneReport report;
    std::vector<double> validation_history;
};

// Seed of a strategy: run seed + its ordinal in kStrategyNames.
std::uint64_t strategy_seed(std::uint64_t run_seed, std::string_view strategy);

// Mask + fine-tune for one strategy on a private copy of `base`.
StrategyResult run_strategy(const Network& base, const SensitivityMap& map, const StrategyVector& strategy,
                            const DataSplits& data, const RunConfig& config, double baseline_accuracy_pct,
                            CostLedger* ledger = nullptr);

// Runs the strategies of `set` (in `order` when given, by index into the set)
// with up to `config.parallel` workers. Results come back in set order. A
// failing strategy is reported as failed and the rest still run. The base
// model and the sensitivity map are only read.
std::vector<StrategyResult> run_all_strategies(const Network& base, const SensitivityMap& map, const StrategySet& set,
                                               const DataSplits& data, const RunConfig& config,
                                               double baseline_accuracy_pct, CostLedger& ledger,
                                               std::span<const std::size_t> order = {});

}  // namespace mixprune
