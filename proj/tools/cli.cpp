#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "mixprune/config.hpp"
#include "mixprune/dataset.hpp"
#include "mixprune/errors.hpp"
#include "mixprune/model_io.hpp"
#include "mixprune/pipeline.hpp"
#include "mixprune/report.hpp"
#include "mixprune/toy.hpp"

namespace mixprune::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kOutEnv = "MIXPRUNE_OUT";

// Bad invocation: missing flags or input paths.
class UsageError : public Error {
  public:
    using Error::Error;
};

struct Common {
    std::string model;
    std::string data;
    std::string data_format = "csv";
    std::string config;
    std::string out;
    std::string criterion;
    std::uint64_t seed = 0;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("--model", c.model, "Model file (.smix)");
    app->add_option("--data", c.data, "Directory holding train/validation/test splits");
    app->add_option("--data-format", c.data_format, "csv or idx")->check(CLI::IsMember({"csv", "idx"}));
    app->add_option("--config", c.config, "RunConfig JSON; its values override flags");
    app->add_option("--out", c.out, fmt::format("Output directory (default ${})", kOutEnv));
    app->add_option("--seed", c.seed, "Run seed");
    app->add_option("--criterion", c.criterion, "magnitude, gradient or product");
}

fs::path out_dir(const Common& c) {
    if (!c.out.empty()) return c.out;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    throw UsageError(fmt::format("no output directory: pass --out or set {}", kOutEnv));
}

fs::path require_file(const std::string& path, std::string_view flag) {
    if (path.empty()) throw UsageError(fmt::format("{} is required", flag));
    if (!fs::is_regular_file(path)) throw UsageError(fmt::format("{} {}: no such file", flag, path));
    return path;
}

Network load_base_model(const Common& c) { return load_model(require_file(c.model, "--model")); }

DataSplits load_data(const Common& c, const RunConfig& config) {
    if (c.data.empty()) throw UsageError("--data is required");
    const fs::path dir = c.data;
    if (!fs::is_directory(dir)) throw UsageError(fmt::format("--data {}: not a directory", c.data));
    const DatasetFormat format = parse_dataset_format(c.data_format);
    const auto load = [&](std::string_view split, SplitTag tag) {
        const fs::path path =
            dir / (format == DatasetFormat::Csv ? fmt::format("{}.csv", split) : fmt::format("{}-images-idx3-ubyte", split));
        if (!fs::is_regular_file(path)) throw UsageError(fmt::format("missing data file {}", path.string()));
        return load_dataset(path, format, tag);
    };
    DataSplits s;
    s.train = load("train", SplitTag::Train);
    s.validation = load("validation", SplitTag::Validation);
    s.test = load("test", SplitTag::Test);
    s.calibration = derive_calibration(s.train, config.calibration_fraction, config.seed);
    return s;
}

// Defaults, then flags, then the config file.
RunConfig effective_config(const Common& c, const CLI::App* app, const std::function<void(RunConfig&)>& extra = {}) {
    RunConfig config;
    if (app->count("--seed")) config.seed = c.seed;
    if (app->count("--criterion")) config.criterion = parse_criterion(c.criterion);
    if (extra) extra(config);
    if (c.config.empty()) {
        validate(config);
        return config;
    }
    json j = to_json(config);
    json file;
    try {
        file = json::parse(read_file(require_file(c.config, "--config")));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", c.config, e.what()));
    }
    j.merge_patch(file);
    return run_config_from_json(j);
}

std::string sensitivity_dump(const SensitivityMap& map) {
    return fmt::format("criterion,{}\ndigest,{}\ncalibration,{}\n\n{}", to_string(map.criterion()), fingerprint(map),
                       map.calibration_fingerprint(), sensitivity_summary_csv(map));
}

void print_table(std::ostream& out, std::span<const PruneReport> reports) {
    out << fmt::format("{:<24} {:>9} {:>9} {:>8} {:>6}  {}\n", "strategy", "sparsity%", "accuracy%", "drop", "epochs",
                       "pareto");
    for (const PruneReport& r : reports) {
        if (r.failed) {
            out << fmt::format("{:<24} FAILED: {}\n", r.strategy, r.error);
            continue;
        }
        out << fmt::format("{:<24} {:>9.2f} {:>9.2f} {:>8.2f} {:>6}  {}\n", r.strategy, r.global_sparsity_pct,
                           r.accuracy_pct, r.drop_pct, r.epochs_used, r.pareto ? "*" : "");
    }
}

int cmd_analyze(const Common& c, const CLI::App* app, std::ostream& out) {
    const RunConfig config = effective_config(c, app);
    const Network model = load_base_model(c);
    const DataSplits data = load_data(c, config);
    const fs::path dir = out_dir(c);
    const Analysis a = analyze(model, data, config);
    fs::create_directories(dir);
    write_file_atomic(dir / "sensitivity.csv", sensitivity_dump(a.sensitivity));
    write_file_atomic(dir / "ranges.csv", ranges_to_csv(model, a.ranges));
    out << fmt::format("sensitivity digest {}\nwrote {} and {}\n", fingerprint(a.sensitivity),
                       (dir / "sensitivity.csv").string(), (dir / "ranges.csv").string());
    return kExitOk;
}

int cmd_strategies(const Common& c, const CLI::App* app, std::ostream& out) {
    const RunConfig config = effective_config(c, app);
    const Network model = load_base_model(c);
    const fs::path dir = out_dir(c);
    const auto ranges = effective_ranges(model, config);
    const StrategySet set = build_strategy_set(ranges, model, config.structure);
    fs::create_directories(dir);
    write_file_atomic(dir / "ranges.csv", ranges_to_csv(model, ranges));
    write_file_atomic(dir / "strategies.csv", strategies_to_csv(set, model));
    for (const auto& w : set.warnings) out << "warning: " << w << '\n';
    for (const auto& s : set.strategies)
        out << fmt::format("{:<24} nominal sparsity {:6.2f}%\n", s.name, nominal_global_sparsity(s, model));
    return kExitOk;
}

int cmd_prune(const Common& c, const CLI::App* app, const std::string& strategy, std::ostream& out) {
    const RunConfig config = effective_config(c, app);
    try {
        (void)strategy_ordinal(strategy);
    } catch (const InputError& e) {
        throw UsageError(e.what());
    }
    const Network model = load_base_model(c);
    const DataSplits data = load_data(c, config);
    const fs::path dir = out_dir(c);
    const Analysis a = analyze(model, data, config);
    const double baseline = accuracy(model, data.test);
    const StrategyResult r =
        run_strategy(model, a.sensitivity, a.strategies.find(strategy), data, config, baseline);
    fs::create_directories(dir / "models");
    json report = to_json(r.report);
    report["baseline_accuracy_pct"] = round2(baseline);
    report["effective_config"] = to_json(config);
    write_file_atomic(dir / fmt::format("{}.json", strategy), report.dump(2) + "\n");
    print_table(out, std::span(&r.report, 1));
    if (!r.model) return kExitFailure;
    save_model(*r.model, dir / "models" / fmt::format("{}.smix", strategy));
    return kExitOk;
}

int cmd_run_all(const Common& c, const CLI::App* app, std::size_t parallel, std::optional<std::size_t> max_epochs,
                std::ostream& out) {
    const RunConfig config = effective_config(c, app, [&](RunConfig& cfg) {
        if (app->count("--parallel")) cfg.parallel = parallel;
        if (max_epochs) cfg.fine_tune.max_epochs = *max_epochs;
    });
    const Network model = load_base_model(c);
    const DataSplits data = load_data(c, config);
    const fs::path dir = out_dir(c);
    const FrameworkRun run = run_framework(model, data, config);
    fs::create_directories(dir / "models");
    for (const StrategyResult& r : run.results)
        if (r.model) save_model(*r.model, dir / "models" / fmt::format("{}.smix", r.strategy.name));
    emit(run.summary, dir);
    write_file_atomic(dir / "sensitivity.csv", sensitivity_dump(run.analysis.sensitivity));
    write_file_atomic(dir / "ranges.csv", ranges_to_csv(model, run.analysis.ranges));
    write_file_atomic(dir / "strategies.csv", strategies_to_csv(run.analysis.strategies, model));
    print_table(out, run.summary.reports);
    const LedgerCounts& l = run.summary.ledger;
    out << fmt::format("baseline {:.2f}%  ledger sensitivity_calls={} finetune_runs={} {}  status {}\n",
                       run.summary.baseline_accuracy_pct, l.sensitivity_calls, l.finetune_runs, conformance(l),
                       run.summary.complete ? "COMPLETE" : "PARTIAL");
    return run.summary.complete ? kExitOk : kExitFailure;
}

int cmd_report(const Common& c, const std::string& reports_dir, std::ostream& out) {
    const fs::path src = reports_dir;
    if (reports_dir.empty() || !fs::is_directory(src)) throw UsageError("--reports must name a directory");
    const fs::path dir = c.out.empty() ? src : out_dir(c);
    std::optional<RunSummary> summary;
    std::vector<PruneReport> reports;
    if (fs::is_regular_file(src / "report.json")) {
        try {
            summary = run_summary_from_json(json::parse(read_file(src / "report.json")));
        } catch (const json::exception& e) {
            throw InputError(fmt::format("{}: {}", (src / "report.json").string(), e.what()));
        }
        reports = summary->reports;
    } else if (fs::is_regular_file(src / "report.csv")) {
        reports = parse_report_csv(read_file(src / "report.csv"));
    } else {
        throw UsageError(fmt::format("{} holds no report.json or report.csv", src.string()));
    }
    if (reports.empty()) throw UsageError(fmt::format("{} holds no reports", src.string()));
    std::size_t changed = 0;
    std::vector<PruneReport> flagged = reports;
    mark_pareto(flagged);
    for (std::size_t i = 0; i < reports.size(); ++i) changed += reports[i].pareto != flagged[i].pareto;
    fs::create_directories(dir);
    if (summary) {
        summary->reports = flagged;
        emit(*summary, dir);
    } else {
        write_file_atomic(dir / "report.csv", reports_to_csv(flagged));
        write_file_atomic(dir / "pareto.dat", plot_data(flagged));
    }
    print_table(out, flagged);
    out << fmt::format("{} Pareto flag(s) changed on recomputation\n", changed);
    return kExitOk;
}

struct ToyOptions {
    std::string arch = "mlp-4-with-norm";
    std::string dataset = "two-rings";
    std::size_t samples = 2000;
    double noise = 0.2;
    std::size_t classes = 0;
    std::size_t epochs = 40;
    std::string idx_images;
    std::string idx_labels;
};

int cmd_make_toy(const Common& c, const ToyOptions& o, std::ostream& out) {
    ToySpec spec;
    spec.architecture = parse_architecture(o.arch);
    spec.dataset = parse_toy_dataset(o.dataset);
    spec.samples = o.samples;
    spec.noise = o.noise;
    spec.classes = o.classes;
    if (!o.idx_images.empty()) spec.idx_images = require_file(o.idx_images, "--idx-images");
    if (!o.idx_labels.empty()) spec.idx_labels = require_file(o.idx_labels, "--idx-labels");
    const fs::path dir = out_dir(c);
    ToyBundle toy = build_toy(spec, c.seed);
    json meta{{"architecture", o.arch}, {"dataset", o.dataset}, {"samples", o.samples}, {"noise", o.noise},
              {"seed", c.seed},         {"epochs", o.epochs}};
    Network model = toy.model;
    if (o.epochs > 0) {
        FineTuneConfig training = baseline_training_config();
        training.max_epochs = o.epochs;
        const FineTuneOutcome trained = train_baseline(toy.model, toy.data, training, c.seed);
        model = trained.model;
        meta["epochs_used"] = trained.epochs_used;
        meta["validation_accuracy_pct"] = round2(trained.best_validation_accuracy);
    }
    model.tag = o.arch;
    const double test = accuracy(model, toy.data.test);
    meta["test_accuracy_pct"] = round2(test);
    fs::create_directories(dir / "data");
    save_model(model, dir / "model.smix");
    save_csv(toy.data.train, dir / "data" / "train.csv");
    save_csv(toy.data.validation, dir / "data" / "validation.csv");
    save_csv(toy.data.test, dir / "data" / "test.csv");
    write_file_atomic(dir / "baseline.json", meta.dump(2) + "\n");
    out << fmt::format("{} on {}: test accuracy {:.2f}%, written to {}\n", o.arch, o.dataset, test, dir.string());
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Layer-wise sparsity allocation: one sensitivity pass, ten strategies, a Pareto report", "mixprune"};
    app.require_subcommand(1);

    Common common;
    std::string strategy;
    std::string reports_dir;
    std::size_t parallel = 1;
    std::optional<std::size_t> max_epochs;
    ToyOptions toy;

    auto* analyze_cmd = app.add_subcommand("analyze", "Score weights and assign per-layer sparsity ranges");
    auto* strategies_cmd = app.add_subcommand("strategies", "Generate the ten layer-wise sparsity vectors");
    auto* prune_cmd = app.add_subcommand("prune", "Prune and fine-tune one strategy");
    auto* run_all_cmd = app.add_subcommand("run-all", "Run all ten strategies and write the report");
    auto* report_cmd = app.add_subcommand("report", "Recompute Pareto flags of stored reports");
    auto* toy_cmd = app.add_subcommand("make-toy", "Build and train a toy model with its data splits");
    for (auto* sub : {analyze_cmd, strategies_cmd, prune_cmd, run_all_cmd, report_cmd, toy_cmd}) add_common(sub, common);
    prune_cmd->add_option("--strategy", strategy, "Strategy name")->required();
    run_all_cmd->add_option("--parallel", parallel, "Concurrent strategy workers")->check(CLI::PositiveNumber);
    run_all_cmd->add_option("--max-epochs", max_epochs, "Fine-tuning epoch cap");
    report_cmd->add_option("--reports", reports_dir, "Directory holding report.json or report.csv")->required();
    toy_cmd->add_option("--arch", toy.arch, "mlp-2, mlp-4-with-norm, convnet-small or patch-mlp");
    toy_cmd->add_option("--dataset", toy.dataset, "two-rings, blobs or idx-file");
    toy_cmd->add_option("--samples", toy.samples, "Samples to generate");
    toy_cmd->add_option("--noise", toy.noise, "Gaussian noise level");
    toy_cmd->add_option("--classes", toy.classes, "Class count (0: dataset default)");
    toy_cmd->add_option("--epochs", toy.epochs, "Baseline training epochs (0: untrained)");
    toy_cmd->add_option("--idx-images", toy.idx_images, "idx image file for --dataset idx-file");
    toy_cmd->add_option("--idx-labels", toy.idx_labels, "idx label file (default: derived from the image file name)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (analyze_cmd->parsed()) return cmd_analyze(common, analyze_cmd, out);
        if (strategies_cmd->parsed()) return cmd_strategies(common, strategies_cmd, out);
        if (prune_cmd->parsed()) return cmd_prune(common, prune_cmd, strategy, out);
        if (run_all_cmd->parsed()) return cmd_run_all(common, run_all_cmd, parallel, max_epochs, out);
        if (report_cmd->parsed()) return cmd_report(common, reports_dir, out);
        if (toy_cmd->parsed()) return cmd_make_toy(common, toy, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace mixprune::cli
