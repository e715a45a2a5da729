#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mixprune/cost_ledger.hpp"
#include "mixprune/dataset.hpp"
#include "mixprune/network.hpp"

namespace mixprune {

struct PruneMask;

// Outcome of one strategy. Percentages are rounded to two decimals when the
// report is made, so the emitted tables and the in-memory values agree.
struct PruneReport {
    std::string strategy;
    std::vector<double> layer_sparsity;  // fraction, one entry per prunable layer
    double global_sparsity_pct = 0.0;
    double pre_finetune_accuracy_pct = 0.0;
    double accuracy_pct = 0.0;
    // Baseline accuracy minus post-fine-tune accuracy; negative is a gain.
    double drop_pct = 0.0;
    std::size_t epochs_used = 0;
    bool early_stopped = false;
    bool pareto = false;
    // Nonzero prunable weights times four bytes.
    std::uint64_t nonzero_weight_bytes = 0;
    bool failed = false;
    std::string error;
};

double round2(double v);

// 100 * zero-valued weights / weights, over prunable layers' weight tensors.
// Biases and normalization parameters are not counted.
double global_sparsity(const Network& net);
double global_sparsity(const Network& net, const PruneMask& masks);
// Zero-valued fraction of each prunable layer, in layer order.
std::vector<double> layer_sparsity(const Network& net);
std::uint64_t nonzero_weight_bytes(const Network& net);

// Top-1 accuracy in percent; ties in the logits go to the lowest class index.
double accuracy(const Network& net, const DatasetSplit& split, std::size_t batch_size = 256);

// Builds a report from a finished model (sparsity measured, not nominal).
PruneReport make_report(std::string strategy, const Network& model, double baseline_accuracy_pct,
                        double pre_finetune_accuracy_pct, double accuracy_pct, std::size_t epochs_used,
                        bool early_stopped);

struct TradeoffPoint {
    double sparsity = 0.0;
    double accuracy = 0.0;
};

// a dominates b when a is at least as good in both coordinates and strictly
// better in one.
bool dominates(const TradeoffPoint& a, const TradeoffPoint& b) noexcept;

// flags[i] is true when no other point dominates point i. Identical points
// keep each other.
std::vector<bool> pareto_flags(std::span<const TradeoffPoint> points);

// Recomputes every non-failed report's pareto flag; failed reports are never
// on the front.
void mark_pareto(std::vector<PruneReport>& reports);

struct PhaseTimings {
    double phase1_seconds = 0.0;
    double phase2_seconds = 0.0;
    double phase3_seconds = 0.0;

    double total() const noexcept { return phase1_seconds + phase2_seconds + phase3_seconds; }
};

// Everything emitted for one run.
struct RunSummary {
    std::string criterion;
    std::string sensitivity_digest;
    double baseline_accuracy_pct = 0.0;
    std::vector<PruneReport> reports;
    LedgerCounts ledger;
    PhaseTimings timings;
    // True when every strategy ran to completion.
    bool complete = false;
    nlohmann::json effective_config;
};

// "CONFORMANT" when the ledger shows one sensitivity computation and ten
// fine-tuning runs, else "NONCONFORMANT".
std::string_view conformance(const LedgerCounts& ledger);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1)
};
MeanStd mean_std(std::span<const double> values);

// strategy,global_sparsity_pct,accuracy_pct,drop_pct,epochs_used,pareto_flag
// One row per report, then a "Mean±Std" row over the completed ones.
std::string reports_to_csv(std::span<const PruneReport> reports);
// Data rows only; the summary row is skipped. Throws InputError on malformed
// input.
std::vector<PruneReport> parse_report_csv(std::string_view text);

nlohmann::json to_json(const PruneReport& r);
PruneReport report_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunSummary& s);
RunSummary run_summary_from_json(const nlohmann::json& j);

// "sparsity accuracy pareto strategy" rows for gnuplot.
std::string plot_data(std::span<const PruneReport> reports);

struct EmittedFiles {
    std::filesystem::path csv;
    std::filesystem::path json;
    std::filesystem::path plot;
};

// Writes report.csv, report.json and pareto.dat under `dir` (created if
// missing). Throws ModelIoError(Io) when the directory is not writable.
EmittedFiles emit(const RunSummary& summary, const std::filesystem::path& dir);

}  // namespace mixprune
