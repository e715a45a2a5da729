#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixprune/tensor.hpp"

namespace mixprune {

enum class SplitTag { Train, Calibration, Validation, Test };
enum class DatasetFormat { Csv, Idx };

std::string_view to_string(SplitTag tag);
std::string_view to_string(DatasetFormat format);
DatasetFormat parse_dataset_format(std::string_view name);

// Labeled samples. `inputs` is [n, features]; `source_rows` records the row
// of each sample in the pool it was drawn from (empty when loaded directly).
struct DatasetSplit {
    Tensor inputs;
    std::vector<std::int32_t> labels;
    SplitTag tag = SplitTag::Train;
    std::vector<std::size_t> source_rows;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t features() const noexcept { return size() ? inputs.size() / size() : 0; }
    // Highest label + 1.
    std::size_t class_count() const noexcept;
};

// Rows picked by index; `source_rows` maps through to the parent's sources.
DatasetSplit subset(const DatasetSplit& data, std::span<const std::size_t> rows, SplitTag tag);

// CSV: one `label,f1,f2,...` row per sample, optional `label,...` header.
// idx: the classic magic-number layout. Unsigned-byte payloads are scaled to
// [0, 1]. Labels come from `labels_path`, or from the sibling file whose name
// swaps "images" for "labels" and "idx3" for "idx1".
// Errors are InputError naming the line (CSV) or field (idx).
DatasetSplit load_dataset(const std::filesystem::path& path, DatasetFormat format, SplitTag tag = SplitTag::Train,
                          const std::optional<std::filesystem::path>& labels_path = std::nullopt);
DatasetSplit parse_csv_dataset(std::string_view text, SplitTag tag = SplitTag::Train);
DatasetSplit parse_idx_dataset(std::string_view images, std::string_view labels, SplitTag tag = SplitTag::Train);

// Round-trippable CSV (floats printed with nine significant digits).
std::string to_csv(const DatasetSplit& data);
void save_csv(const DatasetSplit& data, const std::filesystem::path& path);

inline constexpr double kMinCalibrationFraction = 0.05;
inline constexpr double kMaxCalibrationFraction = 0.10;

// Stratified, seeded subsample of round(n * fraction) training rows. Each
// class receives floor or ceil of its proportional share (largest remainder).
// Throws ConfigError for fractions outside [0.05, 0.10] or an empty result.
DatasetSplit derive_calibration(const DatasetSplit& train, double fraction, std::uint64_t seed);

// SHA-256 over shape, input bytes and labels.
std::string dataset_fingerprint(const DatasetSplit& data);

}  // namespace mixprune
