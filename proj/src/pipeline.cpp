#include "mixprune/pipeline.hpp"

#include <chrono>

namespace mixprune {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::vector<LayerRange> effective_ranges(const Network& model, const RunConfig& config, CostLedger* ledger) {
    return override_ranges(model, assign_ranges(model, config.rule_table(), ledger), config.range_overrides);
}

Analysis analyze(const Network& model, const DataSplits& data, const RunConfig& config, CostLedger* ledger,
                 PhaseTimings* timings) {
    validate(config);
    const auto t1 = Clock::now();
    SensitivityMap map = compute_sensitivity(model, config.criterion, &data.calibration, config.fine_tune.batch_size,
                                             config.seed, ledger);
    std::vector<LayerRange> ranges = effective_ranges(model, config, ledger);
    const auto t2 = Clock::now();
    StrategySet set = build_strategy_set(ranges, model, config.structure, ledger);
    if (timings) {
        timings->phase1_seconds = std::chrono::duration<double>(t2 - t1).count();
        timings->phase2_seconds = seconds_since(t2);
    }
    return Analysis{std::move(map), std::move(ranges), std::move(set)};
}

FrameworkRun run_framework(const Network& model, const DataSplits& data, const RunConfig& config,
                           std::span<const std::size_t> order) {
    CostLedger ledger;
    PhaseTimings timings;
    Analysis analysis = analyze(model, data, config, &ledger, &timings);
    const double baseline = accuracy(model, data.test);

    const auto t3 = Clock::now();
    std::vector<StrategyResult> results =
        run_all_strategies(model, analysis.sensitivity, analysis.strategies, data, config, baseline, ledger, order);
    timings.phase3_seconds = seconds_since(t3);

    RunSummary summary;
    summary.criterion = std::string(to_string(config.criterion));
    summary.sensitivity_digest = fingerprint(analysis.sensitivity);
    summary.baseline_accuracy_pct = round2(baseline);
    summary.complete = true;
    for (const StrategyResult& r : results) {
        summary.reports.push_back(r.report);
        summary.complete = summary.complete && !r.report.failed;
    }
    summary.ledger = ledger.snapshot();
    summary.timings = timings;
    summary.effective_config = to_json(config);
    return FrameworkRun{std::move(analysis), std::move(results), std::move(summary)};
}

}  // namespace mixprune
