#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mixprune/optimizer.hpp"
#include "mixprune/ranges.hpp"
#include "mixprune/sensitivity.hpp"
#include "mixprune/strategies.hpp"

namespace mixprune {

inline constexpr std::size_t kDefaultBatchSize = 128;
inline constexpr std::size_t kDefaultPatience = 3;
inline constexpr std::size_t kDefaultMaxEpochs = 20;

struct FineTuneConfig {
    OptimizerConfig optimizer{OptimizerKind::Adam, 1e-3};
    std::size_t batch_size = kDefaultBatchSize;
    std::size_t max_epochs = kDefaultMaxEpochs;
    std::size_t patience = kDefaultPatience;
};

struct RunConfig {
    Criterion criterion = Criterion::Magnitude;
    // Rules evaluated after the mandatory ones; default_role_rules() if unset.
    std::optional<std::vector<RangeRule>> role_rules;
    std::vector<RangeOverride> range_overrides;
    StructureCoefficients structure;
    FineTuneConfig fine_tune;
    double calibration_fraction = 0.10;
    std::uint64_t seed = 0;
    std::size_t parallel = 1;

    RuleTable rule_table() const;
};

// Throws ConfigError on any out-of-bounds value (sparsity values outside
// [0, 1], zero batch size, calibration fraction outside [0.05, 0.10], ...).
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace mixprune
