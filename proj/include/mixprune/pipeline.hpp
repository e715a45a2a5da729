#pragma once

#include <span>
#include <vector>

#include "mixprune/config.hpp"
#include "mixprune/cost_ledger.hpp"
#include "mixprune/network.hpp"
#include "mixprune/prune.hpp"
#include "mixprune/ranges.hpp"
#include "mixprune/report.hpp"
#include "mixprune/sensitivity.hpp"
#include "mixprune/strategies.hpp"

namespace mixprune {

// Output of Phases 1 and 2.
struct Analysis {
    SensitivityMap sensitivity;
    std::vector<LayerRange> ranges;
    StrategySet strategies;
};

// Scores the model once and derives ranges and the ten strategies.
// `data.calibration` is only read for the gradient-based criteria.
Analysis analyze(const Network& model, const DataSplits& data, const RunConfig& config, CostLedger* ledger = nullptr,
                 PhaseTimings* timings = nullptr);

// Ranges alone (Phase 1 without scoring).
std::vector<LayerRange> effective_ranges(const Network& model, const RunConfig& config, CostLedger* ledger = nullptr);

struct FrameworkRun {
    Analysis analysis;
    std::vector<StrategyResult> results;  // kStrategyNames order
    RunSummary summary;
};

// All three phases. The base model is never modified. `order` permutes the
// execution order of the strategies (results stay in set order).
FrameworkRun run_framework(const Network& model, const DataSplits& data, const RunConfig& config,
                           std::span<const std::size_t> order = {});

}  // namespace mixprune
