#pragma once

#include <atomic>
#include <cstdint>

namespace mixprune {

struct LedgerCounts {
    std::uint64_t sensitivity_calls = 0;
    std::uint64_t rule_evaluations = 0;
    std::uint64_t strategy_generations = 0;
    std::uint64_t mask_builds = 0;
    std::uint64_t finetune_runs = 0;

    bool operator==(const LedgerCounts&) const = default;
};

// Instrumentation counters for one framework run. Counters only ever grow;
// safe to bump from concurrent strategy workers.
class CostLedger {
  public:
    void add_sensitivity_call() noexcept { sensitivity_calls_.fetch_add(1, std::memory_order_relaxed); }
    void add_rule_evaluations(std::uint64_t n) noexcept { rule_evaluations_.fetch_add(n, std::memory_order_relaxed); }
    void add_strategy_generation() noexcept { strategy_generations_.fetch_add(1, std::memory_order_relaxed); }
    void add_mask_build() noexcept { mask_builds_.fetch_add(1, std::memory_order_relaxed); }
    void add_finetune_run() noexcept { finetune_runs_.fetch_add(1, std::memory_order_relaxed); }

    LedgerCounts snapshot() const noexcept {
        return {sensitivity_calls_.load(), rule_evaluations_.load(), strategy_generations_.load(), mask_builds_.load(),
                finetune_runs_.load()};
    }

  private:
    std::atomic<std::uint64_t> sensitivity_calls_{0};
    std::atomic<std::uint64_t> rule_evaluations_{0};
    std::atomic<std::uint64_t> strategy_generations_{0};
    std::atomic<std::uint64_t> mask_builds_{0};
    std::atomic<std::uint64_t> finetune_runs_{0};
};

// A complete run scores once and fine-tunes each of the ten strategies once.
inline bool ledger_conformant(const LedgerCounts& c) noexcept {
    return c.sensitivity_calls == 1 && c.finetune_runs == 10;
}

}  // namespace mixprune
