#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixprune/cost_ledger.hpp"
#include "mixprune/network.hpp"

namespace mixprune {

// Allowed sparsity interval for one layer, with the rule that produced it.
struct LayerRange {
    int layer_id = 0;
    double rho_min = 0.0;
    double rho_max = 0.0;
    std::string rule_name;

    double width() const noexcept { return rho_max - rho_min; }
};

// Predicate over (role, weight count, depth fraction). Unset fields match
// anything; a rule with every field unset is a catch-all.
struct RuleMatch {
    std::vector<LayerRole> roles;
    std::optional<std::size_t> max_weights_exclusive;
    std::optional<double> min_depth;
    std::optional<double> max_depth_exclusive;

    bool matches(const Layer& layer) const;
    bool is_catch_all() const noexcept;
};

struct RangeRule {
    std::string name;
    RuleMatch match;
    double rho_min = 0.0;
    double rho_max = 0.0;
};

// Ordered rules, first match wins. Construction rejects invalid intervals and
// tables whose last rule is not a catch-all.
class RuleTable {
  public:
    explicit RuleTable(std::vector<RangeRule> rules);
    std::span<const RangeRule> rules() const noexcept { return rules_; }

  private:
    std::vector<RangeRule> rules_;
};

inline constexpr std::size_t kSmallLayerWeights = 10'000;

// The three fixed constraints (normalization unprunable, small layers capped
// at [0, 0.10], patch embeddings held to [0.15, 0.30]) always come first.
std::vector<RangeRule> mandatory_rules();

// Role and depth defaults that follow the mandatory rules:
//   Conv2D, depth < 0.5    [0.30, 0.70]
//   Conv2D, depth >= 0.5   [0.50, 0.90]
//   ClassifierHead         [0.60, 0.95]
//   Dense                  [0.50, 0.90]
//   anything else          [0.20, 0.60]
std::vector<RangeRule> default_role_rules();

RuleTable default_rule_table();
// Mandatory rules followed by `role_rules`, which must end in a catch-all.
RuleTable rule_table_with(std::vector<RangeRule> role_rules);

// One range per layer, in layer order. Normalization layers always receive
// [0, 0] whatever the table says. Evaluates exactly one predicate chain per
// layer (counted in the ledger). Throws ConfigError when the model has no
// prunable layers.
std::vector<LayerRange> assign_ranges(const Network& net, const RuleTable& rules, CostLedger* ledger = nullptr);

// Replacement interval for every layer of a role, or for one layer id.
// Exactly one of `role` / `layer_id` is set.
struct RangeOverride {
    std::optional<LayerRole> role;
    std::optional<int> layer_id;
    double rho_min = 0.0;
    double rho_max = 0.0;
};

// Applies overrides in order (later wins). Throws ConfigError for invalid
// intervals, unknown layer ids, and any attempt to give a normalization layer
// a nonzero range.
std::vector<LayerRange> override_ranges(const Network& net, std::vector<LayerRange> ranges,
                                        std::span<const RangeOverride> overrides);

// Throws ConfigError unless 0 <= rho_min <= rho_max <= 1.
void validate_interval(double rho_min, double rho_max, const std::string& what);

std::string ranges_to_csv(const Network& net, std::span<const LayerRange> ranges);

}  // namespace mixprune
