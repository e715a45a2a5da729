#include "mixprune/ranges.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mixprune/errors.hpp"

namespace mixprune {

bool RuleMatch::matches(const Layer& layer) const {
    if (!roles.empty() && std::find(roles.begin(), roles.end(), layer.role) == roles.end()) return false;
    if (max_weights_exclusive && layer.weight_count() >= *max_weights_exclusive) return false;
    if (min_depth && layer.depth_fraction < *min_depth) return false;
    if (max_depth_exclusive && layer.depth_fraction >= *max_depth_exclusive) return false;
    return true;
}

bool RuleMatch::is_catch_all() const noexcept {
    return roles.empty() && !max_weights_exclusive && !min_depth && !max_depth_exclusive;
}

void validate_interval(double rho_min, double rho_max, const std::string& what) {
    if (!(0.0 <= rho_min && rho_min <= rho_max && rho_max <= 1.0)) {
        throw ConfigError(fmt::format("{}: range [{}, {}] violates 0 <= min <= max <= 1", what, rho_min, rho_max));
    }
}

RuleTable::RuleTable(std::vector<RangeRule> rules) : rules_(std::move(rules)) {
    if (rules_.empty() || !rules_.back().match.is_catch_all()) {
        throw ConfigError("rule table must end with a catch-all rule");
    }
    for (const RangeRule& r : rules_) validate_interval(r.rho_min, r.rho_max, fmt::format("rule '{}'", r.name));
}

std::vector<RangeRule> mandatory_rules() {
    return {
        {"normalization-unprunable", {.roles = {LayerRole::Normalization}}, 0.0, 0.0},
        {"small-layer", {.max_weights_exclusive = kSmallLayerWeights}, 0.0, 0.10},
        {"patch-embedding", {.roles = {LayerRole::PatchEmbedding}}, 0.15, 0.30},
    };
}

std::vector<RangeRule> default_role_rules() {
    return {
        {"conv-early", {.roles = {LayerRole::Conv2D}, .max_depth_exclusive = 0.5}, 0.30, 0.70},
        {"conv-deep", {.roles = {LayerRole::Conv2D}, .min_depth = 0.5}, 0.50, 0.90},
        {"classifier-head", {.roles = {LayerRole::ClassifierHead}}, 0.60, 0.95},
        {"dense", {.roles = {LayerRole::Dense}}, 0.50, 0.90},
        {"default", {}, 0.20, 0.60},
    };
}

RuleTable rule_table_with(std::vector<RangeRule> role_rules) {
    std::vector<RangeRule> all = mandatory_rules();
    all.insert(all.end(), std::make_move_iterator(role_rules.begin()), std::make_move_iterator(role_rules.end()));
    return RuleTable(std::move(all));
}

RuleTable default_rule_table() { return rule_table_with(default_role_rules()); }

std::vector<LayerRange> assign_ranges(const Network& net, const RuleTable& rules, CostLedger* ledger) {
    if (net.prunable_count() == 0) throw ConfigError("model has no prunable layers");
    std::vector<LayerRange> out;
    out.reserve(net.layer_count());
    for (const Layer& l : net.layers()) {
        const auto rule = std::find_if(rules.rules().begin(), rules.rules().end(),
                                       [&](const RangeRule& r) { return r.match.matches(l); });
        // The table ends in a catch-all, so a rule always fires.
        LayerRange range{l.id, rule->rho_min, rule->rho_max, rule->name};
        if (!l.prunable() && (range.rho_min != 0.0 || range.rho_max != 0.0)) {
            range = {l.id, 0.0, 0.0, "normalization-unprunable"};
        }
        out.push_back(std::move(range));
    }
    if (ledger) ledger->add_rule_evaluations(net.layer_count());
    return out;
}

std::vector<LayerRange> override_ranges(const Network& net, std::vector<LayerRange> ranges,
                                        std::span<const RangeOverride> overrides) {
    if (ranges.size() != net.layer_count()) throw ConfigError("range list does not match the model");
    for (const RangeOverride& o : overrides) {
        if (o.role.has_value() == o.layer_id.has_value()) {
            throw ConfigError("a range override targets either a role or a layer id");
        }
        const std::string what = o.role ? fmt::format("override for role {}", to_string(*o.role))
                                        : fmt::format("override for layer {}", *o.layer_id);
        validate_interval(o.rho_min, o.rho_max, what);
        bool hit = false;
        for (std::size_t i = 0; i < net.layer_count(); ++i) {
            const Layer& l = net.layer(i);
            const bool targeted = o.role ? l.role == *o.role : l.id == *o.layer_id;
            if (!targeted) continue;
            hit = true;
            if (!l.prunable() && (o.rho_min != 0.0 || o.rho_max != 0.0)) {
                throw ConfigError(fmt::format("{}: normalization layers are fixed at 0% sparsity", what));
            }
            ranges[i].rho_min = o.rho_min;
            ranges[i].rho_max = o.rho_max;
            ranges[i].rule_name = "override";
        }
        if (o.layer_id && !hit) throw ConfigError(fmt::format("{}: no such layer", what));
    }
    for (const LayerRange& r : ranges) validate_interval(r.rho_min, r.rho_max, fmt::format("layer {}", r.layer_id));
    return ranges;
}

std::string ranges_to_csv(const Network& net, std::span<const LayerRange> ranges) {
    std::string out = "layer_id,role,weights,depth_fraction,rho_min,rho_max,rule\n";
    for (std::size_t i = 0; i < ranges.size(); ++i) {
        const Layer& l = net.layer(i);
        out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{}\n", ranges[i].layer_id, to_string(l.role), l.weight_count(),
                           l.depth_fraction, ranges[i].rho_min, ranges[i].rho_max, ranges[i].rule_name);
    }
    return out;
}

}  // namespace mixprune
