#include "mixprune/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "mixprune/digest.hpp"
#include "mixprune/errors.hpp"
#include "mixprune/model_io.hpp"
#include "mixprune/network.hpp"

namespace mixprune {

namespace fs = std::filesystem;

std::string_view to_string(SplitTag tag) {
    switch (tag) {
        case SplitTag::Train: return "train";
        case SplitTag::Calibration: return "calibration";
        case SplitTag::Validation: return "validation";
        case SplitTag::Test: return "test";
    }
    return "unknown";
}

std::string_view to_string(DatasetFormat format) { return format == DatasetFormat::Csv ? "csv" : "idx"; }

DatasetFormat parse_dataset_format(std::string_view name) {
    if (name == "csv") return DatasetFormat::Csv;
    if (name == "idx") return DatasetFormat::Idx;
    throw InputError(fmt::format("unknown dataset format '{}'", name));
}

std::size_t DatasetSplit::class_count() const noexcept {
    std::int32_t hi = -1;
    for (auto l : labels) hi = std::max(hi, l);
    return static_cast<std::size_t>(hi + 1);
}

DatasetSplit subset(const DatasetSplit& data, std::span<const std::size_t> rows, SplitTag tag) {
    DatasetSplit out;
    out.tag = tag;
    out.inputs = gather_rows(data.inputs, rows);
    out.labels.reserve(rows.size());
    out.source_rows.reserve(rows.size());
    for (std::size_t r : rows) {
        out.labels.push_back(data.labels.at(r));
        out.source_rows.push_back(data.source_rows.empty() ? r : data.source_rows.at(r));
    }
    return out;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::uint32_t be_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<unsigned char>(in[at + i]);
    return v;
}

struct IdxArray {
    std::vector<std::size_t> dims;
    std::vector<float> values;
    bool bytes = false;
};

IdxArray parse_idx(std::string_view in, std::string_view what) {
    if (in.size() < 4 || in[0] != 0 || in[1] != 0) throw InputError(fmt::format("{}: bad idx magic number", what));
    const auto type = static_cast<unsigned char>(in[2]);
    const auto ndims = static_cast<std::size_t>(static_cast<unsigned char>(in[3]));
    if (ndims == 0) throw InputError(fmt::format("{}: idx file declares zero dimensions", what));
    if (in.size() < 4 + 4 * ndims) throw InputError(fmt::format("{}: truncated idx dimension table", what));
    IdxArray out;
    std::size_t count = 1;
    for (std::size_t d = 0; d < ndims; ++d) {
        out.dims.push_back(be_u32(in, 4 + 4 * d));
        count *= out.dims.back();
    }
    const std::size_t offset = 4 + 4 * ndims;
    std::size_t width = 0;
    switch (type) {
        case 0x08: width = 1; out.bytes = true; break;
        case 0x0D: width = 4; break;
        default: throw InputError(fmt::format("{}: unsupported idx element type 0x{:02x}", what, type));
    }
    if (in.size() - offset != count * width) {
        throw InputError(fmt::format("{}: idx payload holds {} bytes, dimensions need {}", what, in.size() - offset,
                                     count * width));
    }
    out.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (width == 1) {
            out.values[i] = static_cast<float>(static_cast<unsigned char>(in[offset + i]));
        } else {
            out.values[i] = std::bit_cast<float>(be_u32(in, offset + 4 * i));
        }
    }
    return out;
}

}  // namespace

DatasetSplit parse_csv_dataset(std::string_view text, SplitTag tag) {
    DatasetSplit out;
    out.tag = tag;
    std::vector<float> values;
    std::size_t width = 0;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        const std::string_view line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (out.labels.empty() && width == 0 && fields[0] == "label") continue;
        if (fields.size() < 2) throw InputError(fmt::format("line {}: expected label and at least one feature", line_no));
        if (width == 0) width = fields.size();
        if (fields.size() != width) {
            throw InputError(fmt::format("line {}: ragged row with {} fields, expected {}", line_no, fields.size(), width));
        }
        std::int64_t label = 0;
        const auto [lp, lec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), label);
        if (lec != std::errc{} || lp != fields[0].data() + fields[0].size() || label < 0 ||
            label > std::numeric_limits<std::int32_t>::max()) {
            throw InputError(fmt::format("line {}: label '{}' is not a non-negative integer", line_no, fields[0]));
        }
        out.labels.push_back(static_cast<std::int32_t>(label));
        for (std::size_t f = 1; f < fields.size(); ++f) {
            double v = 0.0;
            const auto [p, ec] = std::from_chars(fields[f].data(), fields[f].data() + fields[f].size(), v);
            if (ec != std::errc{} || p != fields[f].data() + fields[f].size() || !std::isfinite(v)) {
                throw InputError(fmt::format("line {}: feature {} ('{}') is not a finite number", line_no, f, fields[f]));
            }
            values.push_back(static_cast<float>(v));
        }
    }
    if (out.labels.empty()) throw InputError("dataset has no rows");
    out.inputs = Tensor({out.labels.size(), width - 1}, std::move(values));
    return out;
}

DatasetSplit parse_idx_dataset(std::string_view images, std::string_view labels, SplitTag tag) {
    IdxArray img = parse_idx(images, "images");
    IdxArray lab = parse_idx(labels, "labels");
    if (lab.dims.size() != 1 || !lab.bytes) throw InputError("labels: idx labels must be a 1-D unsigned byte array");
    if (img.dims[0] != lab.dims[0]) {
        throw InputError(fmt::format("images hold {} samples but labels hold {}", img.dims[0], lab.dims[0]));
    }
    const std::size_t n = img.dims[0];
    if (n == 0) throw InputError("dataset has no rows");
    if (img.bytes) {
        for (float& v : img.values) v /= 255.0f;
    }
    DatasetSplit out;
    out.tag = tag;
    const std::size_t features = img.values.size() / n;
    out.inputs = Tensor({n, features}, std::move(img.values));
    out.labels.reserve(n);
    for (float v : lab.values) out.labels.push_back(static_cast<std::int32_t>(v));
    return out;
}

DatasetSplit load_dataset(const fs::path& path, DatasetFormat format, SplitTag tag,
                          const std::optional<fs::path>& labels_path) {
    if (format == DatasetFormat::Csv) {
        try {
            return parse_csv_dataset(read_file(path), tag);
        } catch (const InputError& e) {
            throw InputError(fmt::format("{}: {}", path.string(), e.what()));
        }
    }
    fs::path labels = labels_path.value_or(fs::path{});
    if (labels.empty()) {
        std::string name = path.filename().string();
        for (auto [from, to] : {std::pair{"images", "labels"}, std::pair{"idx3", "idx1"}}) {
            if (auto at = name.find(from); at != std::string::npos) name.replace(at, std::string_view(from).size(), to);
        }
        labels = path.parent_path() / name;
        if (labels == path || !fs::exists(labels)) {
            throw InputError(fmt::format("{}: no labels file given and none found next to it", path.string()));
        }
    }
    return parse_idx_dataset(read_file(path), read_file(labels), tag);
}

std::string to_csv(const DatasetSplit& data) {
    std::string out = "label";
    const std::size_t width = data.features();
    for (std::size_t f = 0; f < width; ++f) out += fmt::format(",f{}", f + 1);
    out += '\n';
    for (std::size_t n = 0; n < data.size(); ++n) {
        out += fmt::format("{}", data.labels[n]);
        for (std::size_t f = 0; f < width; ++f) out += fmt::format(",{:.9g}", data.inputs[n * width + f]);
        out += '\n';
    }
    return out;
}

void save_csv(const DatasetSplit& data, const fs::path& path) { write_file_atomic(path, to_csv(data)); }

DatasetSplit derive_calibration(const DatasetSplit& train, double fraction, std::uint64_t seed) {
    if (!(fraction >= kMinCalibrationFraction && fraction <= kMaxCalibrationFraction)) {
        throw ConfigError(fmt::format("calibration fraction {} outside [{}, {}]", fraction, kMinCalibrationFraction,
                                      kMaxCalibrationFraction));
    }
    const std::size_t n = train.size();
    const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
    if (total == 0) throw ConfigError(fmt::format("calibration subset of {} training rows would be empty", n));

    const std::size_t classes = train.class_count();
    std::vector<std::vector<std::size_t>> by_class(classes);
    for (std::size_t r = 0; r < n; ++r) by_class[static_cast<std::size_t>(train.labels[r])].push_back(r);

    // Largest-remainder apportionment of `total` across classes.
    std::vector<std::size_t> quota(classes);
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        const double ideal = static_cast<double>(total) * static_cast<double>(by_class[c].size()) / static_cast<double>(n);
        quota[c] = static_cast<std::size_t>(std::floor(ideal));
        assigned += quota[c];
        remainders.emplace_back(ideal - std::floor(ideal), c);
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++quota[remainders[k].second];

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> rows;
    rows.reserve(total);
    for (std::size_t c = 0; c < classes; ++c) {
        auto& members = by_class[c];
        std::shuffle(members.begin(), members.end(), rng);
        rows.insert(rows.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(quota[c]));
    }
    std::sort(rows.begin(), rows.end());
    return subset(train, rows, SplitTag::Calibration);
}

std::string dataset_fingerprint(const DatasetSplit& data) {
    Sha256 h;
    for (std::size_t d : data.inputs.shape()) h.update_u64(d);
    h.update(data.inputs.values());
    h.update(std::span<const std::int32_t>(data.labels));
    return h.hex();
}

}  // namespace mixprune
