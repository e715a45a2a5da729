#include "mixprune/model_io.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "mixprune/digest.hpp"

namespace mixprune {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "SMIX";
constexpr std::size_t kPreambleBytes = 12;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
    return v;
}

struct Extent {
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    std::string label;
};

json append_payload(std::string& payload, const Tensor& t) {
    json ext{{"offset", payload.size()}, {"length", t.size() * sizeof(float)}};
    for (float v : t.values()) put_u32(payload, std::bit_cast<std::uint32_t>(v));
    return ext;
}

[[noreturn]] void structural(const std::string& why) { throw ModelIoError(ModelIoCode::Structural, why); }

Tensor read_tensor(std::string_view payload, const json& ext, const Shape& shape, const std::string& label,
                   std::vector<Extent>& extents) {
    if (!ext.is_object() || !ext.contains("offset") || !ext.contains("length")) structural(label + ": missing extent");
    const auto offset = ext.at("offset").get<std::uint64_t>();
    const auto length = ext.at("length").get<std::uint64_t>();
    const std::uint64_t expected = shape_numel(shape) * sizeof(float);
    if (length != expected) {
        structural(fmt::format("{}: payload length {} does not match shape {} ({} bytes)", label, length,
                               shape_to_string(shape), expected));
    }
    if (offset > payload.size() || length > payload.size() - offset) {
        structural(fmt::format("{}: extent [{}, {}) outside payload of {} bytes", label, offset, offset + length,
                               payload.size()));
    }
    extents.push_back({offset, length, label});
    std::vector<float> data(shape_numel(shape));
    for (std::size_t i = 0; i < data.size(); ++i)
        data[i] = std::bit_cast<float>(get_u32(payload, static_cast<std::size_t>(offset) + 4 * i));
    return Tensor(shape, std::move(data));
}

}  // namespace

std::string_view to_string(ModelIoCode code) {
    switch (code) {
        case ModelIoCode::Io: return "io";
        case ModelIoCode::BadMagic: return "bad-magic";
        case ModelIoCode::VersionMismatch: return "version-mismatch";
        case ModelIoCode::Truncated: return "truncated";
        case ModelIoCode::ChecksumMismatch: return "checksum-mismatch";
        case ModelIoCode::Structural: return "structural";
        case ModelIoCode::NoPrunableLayers: return "no-prunable-layers";
    }
    return "unknown";
}

std::string serialize_model(const Network& net) {
    std::string payload;
    json layers = json::array();
    for (const Layer& l : net.layers()) {
        json rec{{"id", l.id},
                 {"role", to_string(l.role)},
                 {"activation", to_string(l.activation)},
                 {"shape", l.weight.shape()},
                 {"depth_fraction", l.depth_fraction},
                 {"prunable", l.prunable()},
                 {"padding", l.padding},
                 {"patch_size", l.patch_size}};
        rec["weight"] = append_payload(payload, l.weight);
        rec["bias"] = l.bias ? append_payload(payload, *l.bias) : json(nullptr);
        if (l.role == LayerRole::Normalization) {
            rec["norm_eps"] = l.norm_eps;
            rec["running_mean"] = append_payload(payload, l.running_mean);
            rec["running_var"] = append_payload(payload, l.running_var);
        }
        layers.push_back(std::move(rec));
    }
    json header{{"format_version", kModelFormatVersion},
                {"tag", net.tag},
                {"input_shape", net.input_shape()},
                {"classes", net.classes()},
                {"layers", std::move(layers)},
                {"payload_bytes", payload.size()},
                {"payload_sha256", sha256_hex(payload)}};
    const std::string text = header.dump(2) + "\n";

    std::string out(kMagic);
    put_u32(out, kModelFormatVersion);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    out += payload;
    return out;
}

Network deserialize_model(std::string_view bytes) {
    if (bytes.size() < kPreambleBytes) {
        if (bytes.size() >= kMagic.size() && bytes.substr(0, kMagic.size()) != kMagic)
            throw ModelIoError(ModelIoCode::BadMagic, "not a model file (bad magic)");
        throw ModelIoError(ModelIoCode::Truncated, "model file shorter than its preamble");
    }
    if (bytes.substr(0, kMagic.size()) != kMagic) throw ModelIoError(ModelIoCode::BadMagic, "not a model file (bad magic)");
    const std::uint32_t version = get_u32(bytes, 4);
    if (version != kModelFormatVersion) {
        throw ModelIoError(ModelIoCode::VersionMismatch,
                           fmt::format("model format version {} unsupported (expected {})", version, kModelFormatVersion));
    }
    const std::uint32_t header_len = get_u32(bytes, 8);
    if (header_len > bytes.size() - kPreambleBytes) {
        throw ModelIoError(ModelIoCode::Truncated, "model header runs past end of file");
    }
    json header;
    try {
        header = json::parse(bytes.substr(kPreambleBytes, header_len));
    } catch (const json::exception& e) {
        structural(fmt::format("unreadable model header: {}", e.what()));
    }
    const std::string_view payload = bytes.substr(kPreambleBytes + header_len);

    try {
        if (header.at("format_version").get<std::uint32_t>() != version) structural("header and preamble versions differ");
        const auto payload_bytes = header.at("payload_bytes").get<std::uint64_t>();
        if (payload.size() < payload_bytes) {
            throw ModelIoError(ModelIoCode::Truncated, fmt::format("payload holds {} of {} declared bytes",
                                                                   payload.size(), payload_bytes));
        }
        if (payload.size() > payload_bytes) structural("trailing bytes after payload");
        if (sha256_hex(payload) != header.at("payload_sha256").get<std::string>()) {
            throw ModelIoError(ModelIoCode::ChecksumMismatch, "payload checksum mismatch");
        }

        const json& records = header.at("layers");
        if (!records.is_array() || records.empty()) {
            throw ModelIoError(ModelIoCode::NoPrunableLayers, "no prunable layers: model has an empty layer list");
        }
        std::vector<Layer> layers;
        std::vector<Extent> extents;
        int expected_id = 1;
        for (const json& rec : records) {
            Layer l;
            l.id = rec.at("id").get<int>();
            if (l.id != expected_id) {
                structural(fmt::format("layer ids must increase from 1 without gaps: found {} where {} expected", l.id,
                                       expected_id));
            }
            ++expected_id;
            l.role = parse_role(rec.at("role").get<std::string>());
            l.activation = parse_activation(rec.at("activation").get<std::string>());
            if (rec.at("prunable").get<bool>() != l.prunable()) {
                structural(fmt::format("layer {}: prunable flag contradicts role {}", l.id, to_string(l.role)));
            }
            l.padding = rec.at("padding").get<std::size_t>();
            l.patch_size = rec.at("patch_size").get<std::size_t>();
            const auto shape = rec.at("shape").get<Shape>();
            const std::string label = fmt::format("layer {}", l.id);
            l.weight = read_tensor(payload, rec.at("weight"), shape, label + " weight", extents);
            if (!rec.at("bias").is_null()) {
                l.bias = read_tensor(payload, rec.at("bias"), {shape.at(0)}, label + " bias", extents);
            }
            if (l.role == LayerRole::Normalization) {
                l.norm_eps = rec.at("norm_eps").get<float>();
                l.running_mean = read_tensor(payload, rec.at("running_mean"), shape, label + " running_mean", extents);
                l.running_var = read_tensor(payload, rec.at("running_var"), shape, label + " running_var", extents);
            }
            layers.push_back(std::move(l));
        }
        std::sort(extents.begin(), extents.end(), [](const Extent& a, const Extent& b) { return a.offset < b.offset; });
        for (std::size_t i = 1; i < extents.size(); ++i) {
            if (extents[i].offset < extents[i - 1].offset + extents[i - 1].length) {
                structural(fmt::format("payload extents overlap: {} and {}", extents[i - 1].label, extents[i].label));
            }
        }
        if (std::none_of(layers.begin(), layers.end(), [](const Layer& l) { return l.prunable(); })) {
            throw ModelIoError(ModelIoCode::NoPrunableLayers, "no prunable layers in model");
        }
        Network net(header.at("input_shape").get<Shape>(), header.at("classes").get<std::size_t>(), std::move(layers));
        net.tag = header.value("tag", std::string{});
        return net;
    } catch (const json::exception& e) {
        structural(fmt::format("malformed model header: {}", e.what()));
    } catch (const ShapeError& e) {
        structural(e.what());
    } catch (const InputError& e) {
        structural(e.what());
    }
}

void write_file_atomic(const fs::path& path, std::string_view bytes) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ModelIoError(ModelIoCode::Io, fmt::format("cannot open {} for writing", tmp.string()));
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ModelIoError(ModelIoCode::Io, fmt::format("write to {} failed", tmp.string()));
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ModelIoError(ModelIoCode::Io, fmt::format("cannot move {} into place", path.string()));
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelIoError(ModelIoCode::Io, fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void save_model(const Network& net, const fs::path& path) { write_file_atomic(path, serialize_model(net)); }

Network load_model(const fs::path& path) { return deserialize_model(read_file(path)); }

}  // namespace mixprune
