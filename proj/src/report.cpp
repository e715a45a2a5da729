#include "mixprune/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "mixprune/errors.hpp"
#include "mixprune/model_io.hpp"
#include "mixprune/prune.hpp"

namespace mixprune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kCsvHeader = "strategy,global_sparsity_pct,accuracy_pct,drop_pct,epochs_used,pareto_flag";
constexpr std::string_view kSummaryLabel = "Mean±Std";
constexpr std::string_view kFailedFlag = "FAILED";

double parse_double(std::string_view s, std::size_t line) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
        throw InputError(fmt::format("report line {}: '{}' is not a number", line, s));
    }
    return v;
}

}  // namespace

double round2(double v) { return std::round(v * 100.0) / 100.0; }

double global_sparsity(const Network& net) {
    std::size_t zeros = 0, total = 0;
    for (const Layer& l : net.layers()) {
        if (!l.prunable()) continue;
        for (float w : l.weight.values()) zeros += w == 0.0f;
        total += l.weight_count();
    }
    return total ? 100.0 * static_cast<double>(zeros) / static_cast<double>(total) : 0.0;
}

double global_sparsity(const Network& net, const PruneMask& masks) {
    std::size_t pruned = 0, total = 0;
    for (const Layer& l : net.layers()) {
        if (!l.prunable()) continue;
        total += l.weight_count();
        if (const LayerMask* m = masks.find(l.id)) pruned += m->pruned();
    }
    return total ? 100.0 * static_cast<double>(pruned) / static_cast<double>(total) : 0.0;
}

std::vector<double> layer_sparsity(const Network& net) {
    std::vector<double> out;
    for (const Layer& l : net.layers()) {
        if (!l.prunable()) continue;
        const auto w = l.weight.values();
        const auto zeros = std::count(w.begin(), w.end(), 0.0f);
        out.push_back(w.empty() ? 0.0 : static_cast<double>(zeros) / static_cast<double>(w.size()));
    }
    return out;
}

std::uint64_t nonzero_weight_bytes(const Network& net) {
    std::uint64_t nonzero = 0;
    for (const Layer& l : net.layers()) {
        if (!l.prunable()) continue;
        for (float w : l.weight.values()) nonzero += w != 0.0f;
    }
    return nonzero * sizeof(float);
}

double accuracy(const Network& net, const DatasetSplit& split, std::size_t batch_size) {
    if (split.size() == 0) throw InputError("accuracy of an empty split is undefined");
    if (batch_size == 0) batch_size = split.size();
    std::size_t correct = 0;
    const std::size_t classes = net.classes();
    for (std::size_t begin = 0; begin < split.size(); begin += batch_size) {
        const std::size_t end = std::min(split.size(), begin + batch_size);
        const Tensor logits = forward(net, slice_rows(split.inputs, begin, end));
        for (std::size_t n = 0; n < end - begin; ++n) {
            const float* row = logits.data() + n * classes;
            const auto best = static_cast<std::int32_t>(std::max_element(row, row + classes) - row);
            correct += best == split.labels[begin + n];
        }
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(split.size());
}

PruneReport make_report(std::string strategy, const Network& model, double baseline_accuracy_pct,
                        double pre_finetune_accuracy_pct, double accuracy_pct, std::size_t epochs_used,
                        bool early_stopped) {
    PruneReport r;
    r.strategy = std::move(strategy);
    r.layer_sparsity = layer_sparsity(model);
    r.global_sparsity_pct = round2(global_sparsity(model));
    r.pre_finetune_accuracy_pct = round2(pre_finetune_accuracy_pct);
    r.accuracy_pct = round2(accuracy_pct);
    r.drop_pct = round2(round2(baseline_accuracy_pct) - r.accuracy_pct);
    r.epochs_used = epochs_used;
    r.early_stopped = early_stopped;
    r.nonzero_weight_bytes = nonzero_weight_bytes(model);
    return r;
}

bool dominates(const TradeoffPoint& a, const TradeoffPoint& b) noexcept {
    return a.sparsity >= b.sparsity && a.accuracy >= b.accuracy && (a.sparsity > b.sparsity || a.accuracy > b.accuracy);
}

std::vector<bool> pareto_flags(std::span<const TradeoffPoint> points) {
    // Sort by sparsity descending, accuracy descending. A point is dominated
    // iff some point earlier in this order (strictly sparser, or equally
    // sparse and strictly more accurate) is at least as accurate.
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].sparsity != points[b].sparsity) return points[a].sparsity > points[b].sparsity;
        return points[a].accuracy > points[b].accuracy;
    });
    std::vector<bool> flags(points.size(), true);
    double best_strict = -std::numeric_limits<double>::infinity();  // best accuracy among strictly sparser points
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && points[order[j]].sparsity == points[order[i]].sparsity) ++j;
        const double group_best = points[order[i]].accuracy;
        for (std::size_t k = i; k < j; ++k) {
            const TradeoffPoint& p = points[order[k]];
            if (best_strict >= p.accuracy || group_best > p.accuracy) flags[order[k]] = false;
        }
        best_strict = std::max(best_strict, group_best);
        i = j;
    }
    return flags;
}

void mark_pareto(std::vector<PruneReport>& reports) {
    std::vector<TradeoffPoint> points;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < reports.size(); ++i) {
        reports[i].pareto = false;
        if (reports[i].failed) continue;
        points.push_back({reports[i].global_sparsity_pct, reports[i].accuracy_pct});
        index.push_back(i);
    }
    const auto flags = pareto_flags(points);
    for (std::size_t k = 0; k < index.size(); ++k) reports[index[k]].pareto = flags[k];
}

std::string_view conformance(const LedgerCounts& ledger) {
    return ledger_conformant(ledger) ? "CONFORMANT" : "NONCONFORMANT";
}

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double sq = 0.0;
        for (double v : values) sq += (v - out.mean) * (v - out.mean);
        out.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
    }
    return out;
}

std::string reports_to_csv(std::span<const PruneReport> reports) {
    std::string out(kCsvHeader);
    out += '\n';
    std::vector<double> sp, acc, drop, ep;
    for (const PruneReport& r : reports) {
        if (r.failed) {
            out += fmt::format("{},,,,{},{}\n", r.strategy, r.epochs_used, kFailedFlag);
            continue;
        }
        out += fmt::format("{},{:.2f},{:.2f},{:.2f},{},{}\n", r.strategy, r.global_sparsity_pct, r.accuracy_pct,
                           r.drop_pct, r.epochs_used, r.pareto ? 1 : 0);
        sp.push_back(r.global_sparsity_pct);
        acc.push_back(r.accuracy_pct);
        drop.push_back(r.drop_pct);
        ep.push_back(static_cast<double>(r.epochs_used));
    }
    const auto cell = [](std::span<const double> v) {
        const MeanStd m = mean_std(v);
        return fmt::format("{:.6f}±{:.6f}", m.mean, m.std);
    };
    out += fmt::format("{},{},{},{},{},\n", kSummaryLabel, cell(sp), cell(acc), cell(drop), cell(ep));
    return out;
}

std::vector<PruneReport> parse_report_csv(std::string_view text) {
    std::vector<PruneReport> out;
    std::size_t pos = 0, line_no = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != kCsvHeader) throw InputError(fmt::format("report line {}: unexpected header '{}'", line_no, line));
            header_seen = true;
            continue;
        }
        std::vector<std::string_view> f;
        std::size_t start = 0;
        while (true) {
            const std::size_t c = line.find(',', start);
            f.push_back(line.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
            if (c == std::string_view::npos) break;
            start = c + 1;
        }
        if (f.size() != 6) throw InputError(fmt::format("report line {}: expected 6 fields, got {}", line_no, f.size()));
        if (f[0] == kSummaryLabel) continue;
        PruneReport r;
        r.strategy = std::string(f[0]);
        r.epochs_used = static_cast<std::size_t>(parse_double(f[4], line_no));
        if (f[5] == kFailedFlag) {
            r.failed = true;
        } else {
            r.global_sparsity_pct = parse_double(f[1], line_no);
            r.accuracy_pct = parse_double(f[2], line_no);
            r.drop_pct = parse_double(f[3], line_no);
            if (f[5] != "0" && f[5] != "1") throw InputError(fmt::format("report line {}: bad pareto flag", line_no));
            r.pareto = f[5] == "1";
        }
        out.push_back(std::move(r));
    }
    if (!header_seen) throw InputError("report CSV is empty");
    return out;
}

json to_json(const PruneReport& r) {
    return json{{"strategy", r.strategy},
                {"layer_sparsity", r.layer_sparsity},
                {"global_sparsity_pct", r.global_sparsity_pct},
                {"pre_finetune_accuracy_pct", r.pre_finetune_accuracy_pct},
                {"accuracy_pct", r.accuracy_pct},
                {"drop_pct", r.drop_pct},
                {"epochs_used", r.epochs_used},
                {"early_stopped", r.early_stopped},
                {"pareto", r.pareto},
                {"nonzero_weight_bytes", r.nonzero_weight_bytes},
                {"failed", r.failed},
                {"error", r.error}};
}

PruneReport report_from_json(const json& j) {
    PruneReport r;
    r.strategy = j.at("strategy").get<std::string>();
    r.layer_sparsity = j.at("layer_sparsity").get<std::vector<double>>();
    r.global_sparsity_pct = j.at("global_sparsity_pct").get<double>();
    r.pre_finetune_accuracy_pct = j.at("pre_finetune_accuracy_pct").get<double>();
    r.accuracy_pct = j.at("accuracy_pct").get<double>();
    r.drop_pct = j.at("drop_pct").get<double>();
    r.epochs_used = j.at("epochs_used").get<std::size_t>();
    r.early_stopped = j.at("early_stopped").get<bool>();
    r.pareto = j.at("pareto").get<bool>();
    r.nonzero_weight_bytes = j.at("nonzero_weight_bytes").get<std::uint64_t>();
    r.failed = j.at("failed").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
}

json to_json(const RunSummary& s) {
    json reports = json::array();
    std::vector<double> sp, acc, drop;
    for (const auto& r : s.reports) {
        reports.push_back(to_json(r));
        if (r.failed) continue;
        sp.push_back(r.global_sparsity_pct);
        acc.push_back(r.accuracy_pct);
        drop.push_back(r.drop_pct);
    }
    const auto ms = [](std::span<const double> v) {
        const MeanStd m = mean_std(v);
        return json{{"mean", m.mean}, {"std", m.std}};
    };
    return json{
        {"status", s.complete ? "COMPLETE" : "PARTIAL"},
        {"criterion", s.criterion},
        {"sensitivity_digest", s.sensitivity_digest},
        {"baseline_accuracy_pct", s.baseline_accuracy_pct},
        {"reports", reports},
        {"summary", {{"global_sparsity_pct", ms(sp)}, {"accuracy_pct", ms(acc)}, {"drop_pct", ms(drop)}}},
        {"ledger",
         {{"sensitivity_calls", s.ledger.sensitivity_calls},
          {"rule_evaluations", s.ledger.rule_evaluations},
          {"strategy_generations", s.ledger.strategy_generations},
          {"mask_builds", s.ledger.mask_builds},
          {"finetune_runs", s.ledger.finetune_runs},
          {"conformance", conformance(s.ledger)}}},
        {"timings",
         {{"phase1_seconds", s.timings.phase1_seconds},
          {"phase2_seconds", s.timings.phase2_seconds},
          {"phase3_seconds", s.timings.phase3_seconds}}},
        {"effective_config", s.effective_config},
    };
}

RunSummary run_summary_from_json(const json& j) {
    RunSummary s;
    try {
        s.complete = j.at("status").get<std::string>() == "COMPLETE";
        s.criterion = j.at("criterion").get<std::string>();
        s.sensitivity_digest = j.at("sensitivity_digest").get<std::string>();
        s.baseline_accuracy_pct = j.at("baseline_accuracy_pct").get<double>();
        for (const auto& r : j.at("reports")) s.reports.push_back(report_from_json(r));
        const json& l = j.at("ledger");
        s.ledger = {l.at("sensitivity_calls").get<std::uint64_t>(), l.at("rule_evaluations").get<std::uint64_t>(),
                    l.at("strategy_generations").get<std::uint64_t>(), l.at("mask_builds").get<std::uint64_t>(),
                    l.at("finetune_runs").get<std::uint64_t>()};
        const json& t = j.at("timings");
        s.timings = {t.at("phase1_seconds").get<double>(), t.at("phase2_seconds").get<double>(),
                     t.at("phase3_seconds").get<double>()};
        s.effective_config = j.value("effective_config", json::object());
    } catch (const json::exception& e) {
        throw InputError(fmt::format("malformed run report: {}", e.what()));
    }
    return s;
}

std::string plot_data(std::span<const PruneReport> reports) {
    std::string out = "# global_sparsity_pct accuracy_pct pareto strategy\n";
    for (const PruneReport& r : reports) {
        if (r.failed) continue;
        out += fmt::format("{:.2f} {:.2f} {} \"{}\"\n", r.global_sparsity_pct, r.accuracy_pct, r.pareto ? 1 : 0, r.strategy);
    }
    return out;
}

EmittedFiles emit(const RunSummary& summary, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw ModelIoError(ModelIoCode::Io, fmt::format("cannot create report directory {}", dir.string()));
    }
    EmittedFiles files{dir / "report.csv", dir / "report.json", dir / "pareto.dat"};
    write_file_atomic(files.csv, reports_to_csv(summary.reports));
    write_file_atomic(files.json, to_json(summary).dump(2) + "\n");
    write_file_atomic(files.plot, plot_data(summary.reports));
    return files;
}

}  // namespace mixprune
