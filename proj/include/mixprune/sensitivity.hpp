#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixprune/cost_ledger.hpp"
#include "mixprune/dataset.hpp"
#include "mixprune/network.hpp"

namespace mixprune {

enum class Criterion { Magnitude, Gradient, Product };

std::string_view to_string(Criterion c);
// Throws ConfigError for anything but magnitude, gradient or product.
Criterion parse_criterion(std::string_view name);

// Per-weight importance scores for the prunable layers of one network. Lower
// score means pruned first. Built only by the scoring functions below and
// read-only afterwards, so one map can be shared by every strategy.
class SensitivityMap {
  public:
    Criterion criterion() const noexcept { return criterion_; }
    // Empty for magnitude scoring; otherwise "<dataset sha256>:<seed>".
    const std::string& calibration_fingerprint() const noexcept { return calibration_; }

    bool has_layer(int layer_id) const noexcept;
    // Throws InputError if the layer was not scored.
    std::span<const float> scores(int layer_id) const;
    const std::vector<int>& layer_ids() const noexcept { return ids_; }
    // Layers whose gradient map was identically zero; their ranking falls back
    // to flat-index order.
    const std::vector<int>& zero_gradient_layers() const noexcept { return zero_gradient_; }

  private:
    SensitivityMap() = default;

    Criterion criterion_ = Criterion::Magnitude;
    std::string calibration_;
    std::vector<int> ids_;
    std::vector<std::vector<float>> scores_;
    std::vector<int> zero_gradient_;

    friend struct SensitivityBuilder;
};

// |w| for every prunable weight. Biases are never scored.
SensitivityMap score_magnitude(const Network& net, CostLedger* ledger = nullptr);

// |dL/dw| where L is the mean cross-entropy over the whole calibration set.
// Batch gradients are combined weighted by batch size before the absolute
// value is taken. `seed` only enters the fingerprint: scoring is
// deterministic.
SensitivityMap score_gradient(const Network& net, const DatasetSplit& calibration, std::size_t batch_size,
                              std::uint64_t seed, CostLedger* ledger = nullptr);

// |w| * |dL/dw|, element-wise product of the two maps above.
SensitivityMap score_product(const Network& net, const DatasetSplit& calibration, std::size_t batch_size,
                             std::uint64_t seed, CostLedger* ledger = nullptr);

// Dispatch on criterion. `calibration` may be null for magnitude.
SensitivityMap compute_sensitivity(const Network& net, Criterion criterion, const DatasetSplit* calibration,
                                   std::size_t batch_size, std::uint64_t seed, CostLedger* ledger = nullptr);

// Stable SHA-256 over criterion, calibration fingerprint, layer ids and scores.
std::string fingerprint(const SensitivityMap& map);

// Per-layer summary (count, min, mean, max) as CSV for inspection.
std::string sensitivity_summary_csv(const SensitivityMap& map);

}  // namespace mixprune
