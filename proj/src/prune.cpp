#include "mixprune/prune.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "mixprune/errors.hpp"
#include "mixprune/optimizer.hpp"

namespace mixprune {

std::size_t LayerMask::pruned() const noexcept {
    return static_cast<std::size_t>(std::count(keep.begin(), keep.end(), std::uint8_t{0}));
}

const LayerMask* PruneMask::find(int layer_id) const noexcept {
    for (const auto& m : layers)
        if (m.layer_id == layer_id) return &m;
    return nullptr;
}

LayerMask build_mask(const Layer& layer, std::span<const float> scores, double rho) {
    const std::size_t n = layer.weight_count();
    if (scores.size() != n) {
        throw ShapeError(layer.id, fmt::format("layer {}: {} scores for {} weights", layer.id, scores.size(), n));
    }
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError(fmt::format("layer {}: sparsity {} outside [0, 1]", layer.id, rho));
    const std::size_t k = pruned_count(rho, n);
    LayerMask mask{layer.id, std::vector<std::uint8_t>(n, 1)};
    if (k == 0) return mask;
    if (k == n) {
        std::fill(mask.keep.begin(), mask.keep.end(), std::uint8_t{0});
        return mask;
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto lower = [&](std::size_t a, std::size_t b) { return scores[a] < scores[b] || (scores[a] == scores[b] && a < b); };
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(), lower);
    const std::size_t last = order[k - 1];
    // Everything ranked at or below the k-th element is pruned.
    for (std::size_t i = 0; i < n; ++i)
        if (!lower(last, i)) mask.keep[i] = 0;
    return mask;
}

PruneMask build_masks(const Network& net, const SensitivityMap& map, const StrategyVector& strategy,
                      CostLedger* ledger) {
    if (strategy.rho.size() != net.layer_count()) {
        throw ConfigError(fmt::format("strategy {} covers {} layers, model has {}", strategy.name, strategy.rho.size(),
                                      net.layer_count()));
    }
    PruneMask masks;
    for (std::size_t i = 0; i < net.layer_count(); ++i) {
        const Layer& l = net.layer(i);
        if (!l.prunable()) continue;
        masks.layers.push_back(build_mask(l, map.scores(l.id), strategy.rho[i]));
        if (ledger) ledger->add_mask_build();
    }
    return masks;
}

void apply_mask(Network& net, const PruneMask& masks) {
    for (const LayerMask& m : masks.layers) {
        const auto it = std::find_if(net.layers().begin(), net.layers().end(), [&](const Layer& l) { return l.id == m.layer_id; });
        if (it == net.layers().end()) throw ShapeError(m.layer_id, fmt::format("mask for unknown layer {}", m.layer_id));
        auto w = it->weight.values();
        if (w.size() != m.keep.size()) {
            throw ShapeError(m.layer_id, fmt::format("layer {}: mask has {} bits for {} weights", m.layer_id,
                                                     m.keep.size(), w.size()));
        }
        for (std::size_t k = 0; k < w.size(); ++k)
            if (!m.keep[k]) w[k] = 0.0f;
    }
}

FineTuneOutcome fine_tune(Network model, const PruneMask& masks, const DatasetSplit& train,
                          const DatasetSplit& validation, const FineTuneConfig& config, std::uint64_t seed) {
    if (config.batch_size == 0) throw ConfigError("batch size must be positive");
    if (train.size() == 0 || validation.size() == 0) throw ConfigError("fine-tuning needs training and validation data");
    apply_mask(model, masks);

    FineTuneOutcome out;
    Optimizer optimizer(config.optimizer);
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    double best = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    std::size_t step = 0;
    out.model = model;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config.batch_size);
            const std::span<const std::size_t> rows(order.data() + begin, end - begin);
            const Tensor x = gather_rows(train.inputs, rows);
            std::vector<std::int32_t> y(rows.size());
            for (std::size_t k = 0; k < rows.size(); ++k) y[k] = train.labels[rows[k]];
            ++step;
            const LossAndGradients lg = loss_and_gradients(model, x, y);
            if (!std::isfinite(lg.loss)) {
                throw DivergenceError(0, epoch, step, fmt::format("loss became non-finite at epoch {}, step {}", epoch, step));
            }
            try {
                optimizer.step(model, lg.grads);
            } catch (const NumericError& e) {
                throw DivergenceError(e.layer_id(), epoch, step, e.what());
            }
            apply_mask(model, masks);
        }
        out.epochs_used = epoch;
        const double acc = accuracy(model, validation);
        out.validation_history.push_back(acc);
        if (acc > best) {
            best = acc;
            out.model = model;
            stale = 0;
        } else if (++stale >= config.patience) {
            out.early_stopped = true;
            break;
        }
    }
    out.best_validation_accuracy = out.epochs_used ? best : accuracy(out.model, validation);
    out.optimizer_steps = optimizer.steps();
    return out;
}

std::uint64_t strategy_seed(std::uint64_t run_seed, std::string_view strategy) {
    return run_seed + strategy_ordinal(strategy);
}

StrategyResult run_strategy(const Network& base, const SensitivityMap& map, const StrategyVector& strategy,
                            const DataSplits& data, const RunConfig& config, double baseline_accuracy_pct,
                            CostLedger* ledger) {
    StrategyResult result;
    result.strategy = strategy;
    try {
        Network model = base;
        model.tag = strategy.name;
        result.masks = build_masks(model, map, strategy, ledger);
        apply_mask(model, result.masks);
        const double pre = accuracy(model, data.test);
        if (ledger) ledger->add_finetune_run();
        FineTuneOutcome tuned = fine_tune(std::move(model), result.masks, data.train, data.validation, config.fine_tune,
                                          strategy_seed(config.seed, strategy.name));
        const double post = accuracy(tuned.model, data.test);
        result.report = make_report(strategy.name, tuned.model, baseline_accuracy_pct, pre, post, tuned.epochs_used,
                                    tuned.early_stopped);
        result.validation_history = std::move(tuned.validation_history);
        result.model = std::move(tuned.model);
    } catch (const Error& e) {
        result.model.reset();
        result.report = PruneReport{};
        result.report.strategy = strategy.name;
        result.report.failed = true;
        result.report.error = e.what();
    }
    return result;
}

std::vector<StrategyResult> run_all_strategies(const Network& base, const SensitivityMap& map, const StrategySet& set,
                                               const DataSplits& data, const RunConfig& config,
                                               double baseline_accuracy_pct, CostLedger& ledger,
                                               std::span<const std::size_t> order) {
    std::vector<std::size_t> schedule(order.begin(), order.end());
    if (schedule.empty()) {
        schedule.resize(set.strategies.size());
        std::iota(schedule.begin(), schedule.end(), std::size_t{0});
    }
    std::vector<std::size_t> sorted = schedule;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        if (sorted.size() != set.strategies.size() || sorted[k] != k) {
            throw InputError("strategy order must be a permutation of the strategy set");
        }
    }
    std::vector<StrategyResult> results(set.strategies.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t k = next.fetch_add(1); k < schedule.size(); k = next.fetch_add(1)) {
            const std::size_t idx = schedule[k];
            results[idx] = run_strategy(base, map, set.strategies[idx], data, config, baseline_accuracy_pct, &ledger);
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(config.parallel, 1, schedule.size());
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    std::vector<PruneReport> reports;
    for (const auto& r : results) reports.push_back(r.report);
    mark_pareto(reports);
    for (std::size_t i = 0; i < results.size(); ++i) results[i].report.pareto = reports[i].pareto;
    return results;
}

}  // namespace mixprune
