#include "mixprune/config.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mixprune/dataset.hpp"
#include "mixprune/errors.hpp"
#include "mixprune/model_io.hpp"

namespace mixprune {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
    if (!j.is_object()) throw ConfigError(fmt::format("{}: expected an object", where));
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
        }
    }
}

template <typename T>
void read(const json& j, std::string_view key, T& out) {
    if (j.contains(key)) out = j.at(std::string(key)).get<T>();
}

json rule_to_json(const RangeRule& r) {
    json j{{"name", r.name}, {"min", r.rho_min}, {"max", r.rho_max}};
    if (!r.match.roles.empty()) {
        json roles = json::array();
        for (LayerRole role : r.match.roles) roles.push_back(to_string(role));
        j["roles"] = roles;
    }
    if (r.match.max_weights_exclusive) j["max_weights_exclusive"] = *r.match.max_weights_exclusive;
    if (r.match.min_depth) j["min_depth"] = *r.match.min_depth;
    if (r.match.max_depth_exclusive) j["max_depth_exclusive"] = *r.match.max_depth_exclusive;
    return j;
}

RangeRule rule_from_json(const json& j) {
    reject_unknown(j, {"name", "min", "max", "roles", "max_weights_exclusive", "min_depth", "max_depth_exclusive"},
                   "role_rules[]");
    RangeRule r;
    r.name = j.at("name").get<std::string>();
    r.rho_min = j.at("min").get<double>();
    r.rho_max = j.at("max").get<double>();
    if (j.contains("roles"))
        for (const auto& role : j.at("roles")) r.match.roles.push_back(parse_role(role.get<std::string>()));
    if (j.contains("max_weights_exclusive")) r.match.max_weights_exclusive = j.at("max_weights_exclusive").get<std::size_t>();
    if (j.contains("min_depth")) r.match.min_depth = j.at("min_depth").get<double>();
    if (j.contains("max_depth_exclusive")) r.match.max_depth_exclusive = j.at("max_depth_exclusive").get<double>();
    return r;
}

}  // namespace

RuleTable RunConfig::rule_table() const { return rule_table_with(role_rules.value_or(default_role_rules())); }

void validate(const RunConfig& c) {
    (void)c.rule_table();
    for (const RangeOverride& o : c.range_overrides) {
        if (o.role.has_value() == o.layer_id.has_value()) throw ConfigError("a range override targets either a role or a layer id");
        validate_interval(o.rho_min, o.rho_max, "range override");
        if (o.role == LayerRole::Normalization && (o.rho_min != 0.0 || o.rho_max != 0.0)) {
            throw ConfigError("normalization layers are fixed at 0% sparsity");
        }
    }
    for (double v : {c.structure.aggressive, c.structure.conservative, c.structure.classifier_depth}) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(fmt::format("structure coefficient {} outside [0, 1]", v));
    }
    if (!(c.calibration_fraction >= kMinCalibrationFraction && c.calibration_fraction <= kMaxCalibrationFraction)) {
        throw ConfigError(fmt::format("calibration fraction {} outside [0.05, 0.10]", c.calibration_fraction));
    }
    const auto& ft = c.fine_tune;
    if (ft.batch_size == 0) throw ConfigError("batch size must be positive");
    if (!(ft.optimizer.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
    if (!(ft.optimizer.beta1 >= 0.0 && ft.optimizer.beta1 < 1.0 && ft.optimizer.beta2 >= 0.0 && ft.optimizer.beta2 < 1.0))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(ft.optimizer.epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
    if (c.parallel == 0) throw ConfigError("parallel worker count must be at least 1");
}

json to_json(const RunConfig& c) {
    json overrides = json::array();
    for (const RangeOverride& o : c.range_overrides) {
        json j{{"min", o.rho_min}, {"max", o.rho_max}};
        if (o.role) j["role"] = to_string(*o.role);
        if (o.layer_id) j["layer"] = *o.layer_id;
        overrides.push_back(std::move(j));
    }
    json rules = json::array();
    for (const RangeRule& r : c.role_rules.value_or(default_role_rules())) rules.push_back(rule_to_json(r));
    const auto& opt = c.fine_tune.optimizer;
    return json{
        {"criterion", to_string(c.criterion)},
        {"seed", c.seed},
        {"parallel", c.parallel},
        {"calibration_fraction", c.calibration_fraction},
        {"fine_tune",
         {{"optimizer", to_string(opt.kind)},
          {"learning_rate", opt.learning_rate},
          {"beta1", opt.beta1},
          {"beta2", opt.beta2},
          {"epsilon", opt.epsilon},
          {"batch_size", c.fine_tune.batch_size},
          {"max_epochs", c.fine_tune.max_epochs},
          {"patience", c.fine_tune.patience}}},
        {"structure",
         {{"aggressive", c.structure.aggressive},
          {"conservative", c.structure.conservative},
          {"classifier_depth", c.structure.classifier_depth}}},
        {"range_overrides", overrides},
        {"role_rules", rules},
    };
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    try {
        reject_unknown(j, {"criterion", "seed", "parallel", "calibration_fraction", "fine_tune", "structure",
                           "range_overrides", "role_rules"},
                       "config");
        if (j.contains("criterion")) c.criterion = parse_criterion(j.at("criterion").get<std::string>());
        read(j, "seed", c.seed);
        read(j, "parallel", c.parallel);
        read(j, "calibration_fraction", c.calibration_fraction);
        if (j.contains("fine_tune")) {
            const json& f = j.at("fine_tune");
            reject_unknown(f, {"optimizer", "learning_rate", "beta1", "beta2", "epsilon", "batch_size", "max_epochs",
                               "patience"},
                           "fine_tune");
            if (f.contains("optimizer")) c.fine_tune.optimizer.kind = parse_optimizer(f.at("optimizer").get<std::string>());
            read(f, "learning_rate", c.fine_tune.optimizer.learning_rate);
            read(f, "beta1", c.fine_tune.optimizer.beta1);
            read(f, "beta2", c.fine_tune.optimizer.beta2);
            read(f, "epsilon", c.fine_tune.optimizer.epsilon);
            read(f, "batch_size", c.fine_tune.batch_size);
            read(f, "max_epochs", c.fine_tune.max_epochs);
            read(f, "patience", c.fine_tune.patience);
        }
        if (j.contains("structure")) {
            const json& s = j.at("structure");
            reject_unknown(s, {"aggressive", "conservative", "classifier_depth"}, "structure");
            read(s, "aggressive", c.structure.aggressive);
            read(s, "conservative", c.structure.conservative);
            read(s, "classifier_depth", c.structure.classifier_depth);
        }
        if (j.contains("range_overrides")) {
            for (const json& o : j.at("range_overrides")) {
                reject_unknown(o, {"role", "layer", "min", "max"}, "range_overrides[]");
                RangeOverride ov;
                if (o.contains("role")) ov.role = parse_role(o.at("role").get<std::string>());
                if (o.contains("layer")) ov.layer_id = o.at("layer").get<int>();
                ov.rho_min = o.at("min").get<double>();
                ov.rho_max = o.at("max").get<double>();
                c.range_overrides.push_back(ov);
            }
        }
        if (j.contains("role_rules")) {
            std::vector<RangeRule> rules;
            for (const json& r : j.at("role_rules")) rules.push_back(rule_from_json(r));
            c.role_rules = std::move(rules);
        }
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("malformed config: {}", e.what()));
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    validate(c);
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return run_config_from_json(j);
}

}  // namespace mixprune
