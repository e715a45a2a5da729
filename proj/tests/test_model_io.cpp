#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>

#include <json.hpp>

#include "mixprune/model_io.hpp"
#include "testnets.hpp"

using namespace mixprune;
namespace fs = std::filesystem;

namespace {

std::uint32_t u32_at(std::string_view b, std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(b[off + static_cast<std::size_t>(k)]);
    return v;
}

void put_u32_at(std::string& b, std::size_t off, std::uint32_t v) {
    for (std::size_t k = 0; k < 4; ++k) b[off + k] = static_cast<char>((v >> (8 * k)) & 0xff);
}

nlohmann::json header_of(std::string_view b) { return nlohmann::json::parse(b.substr(12, u32_at(b, 8))); }

// Same payload, new header.
std::string with_header(std::string_view b, const nlohmann::json& h) {
    const std::string text = h.dump();
    std::string out(b.substr(0, 12));
    put_u32_at(out, 8, static_cast<std::uint32_t>(text.size()));
    return out + text + std::string(b.substr(12 + u32_at(b, 8)));
}

ModelIoCode code_of(std::string_view bytes) {
    try {
        (void)deserialize_model(bytes);
    } catch (const ModelIoError& e) {
        return e.code();
    }
    ADD_FAILURE() << "load succeeded";
    return ModelIoCode::Io;
}

void expect_identical(const Network& a, const Network& b) {
    ASSERT_EQ(a.layer_count(), b.layer_count());
    EXPECT_EQ(a.input_shape(), b.input_shape());
    EXPECT_EQ(a.classes(), b.classes());
    for (std::size_t i = 0; i < a.layer_count(); ++i) {
        const Layer &x = a.layer(i), &y = b.layer(i);
        EXPECT_EQ(x.role, y.role);
        EXPECT_EQ(x.activation, y.activation);
        EXPECT_EQ(x.padding, y.padding);
        EXPECT_EQ(x.patch_size, y.patch_size);
        EXPECT_TRUE(x.weight.bit_equal(y.weight)) << "layer " << x.id;
        ASSERT_EQ(x.bias.has_value(), y.bias.has_value());
        if (x.bias) EXPECT_TRUE(x.bias->bit_equal(*y.bias));
        EXPECT_TRUE(x.running_mean.bit_equal(y.running_mean));
        EXPECT_TRUE(x.running_var.bit_equal(y.running_var));
    }
}

}  // namespace

TEST(ModelIo, RoundTripsEveryLayerKindBitExactly) {
    for (Network net : {testnets::tiny_mlp(1), testnets::tiny_conv(2), testnets::tiny_patch(3)}) {
        net.tag = "round-trip";
        net.layer(0).weight[0] = -0.0f;
        net.layer(0).weight[1] = 0.0f;
        const Network back = deserialize_model(serialize_model(net));
        expect_identical(net, back);
        EXPECT_EQ(back.tag, "round-trip");
        EXPECT_TRUE(std::signbit(back.layer(0).weight[0]));
        EXPECT_FALSE(std::signbit(back.layer(0).weight[1]));
    }
}

TEST(ModelIo, SerializationIsDeterministic) {
    EXPECT_EQ(serialize_model(testnets::tiny_conv(5)), serialize_model(testnets::tiny_conv(5)));
}

TEST(ModelIo, SaveAndLoadThroughTheFilesystem) {
    const fs::path dir = fs::temp_directory_path() / "mixprune_model_io";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const Network net = testnets::tiny_patch(4);
    save_model(net, dir / "m.smix");
    expect_identical(net, load_model(dir / "m.smix"));
    for (const auto& e : fs::directory_iterator(dir)) EXPECT_EQ(e.path().filename(), "m.smix");
    try {
        (void)load_model(dir / "missing.smix");
        FAIL();
    } catch (const ModelIoError& e) {
        EXPECT_EQ(e.code(), ModelIoCode::Io);
    }
}

TEST(ModelIo, ReportsEachCorruptionWithItsCode) {
    const std::string good = serialize_model(testnets::tiny_mlp(1));
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_EQ(code_of(bad_magic), ModelIoCode::BadMagic);
    EXPECT_EQ(code_of("SMI"), ModelIoCode::Truncated);
    EXPECT_EQ(code_of(""), ModelIoCode::Truncated);

    std::string version = good;
    put_u32_at(version, 4, kModelFormatVersion + 1);
    EXPECT_EQ(code_of(version), ModelIoCode::VersionMismatch);

    EXPECT_EQ(code_of(std::string_view(good).substr(0, good.size() - 3)), ModelIoCode::Truncated);
    EXPECT_EQ(code_of(std::string_view(good).substr(0, 20)), ModelIoCode::Truncated);

    std::string flipped = good;
    flipped.back() ^= 0x01;
    EXPECT_EQ(code_of(flipped), ModelIoCode::ChecksumMismatch);

    EXPECT_EQ(code_of(good + "x"), ModelIoCode::Structural);

    auto h = header_of(good);
    h["layers"][1]["prunable"] = true;
    EXPECT_EQ(code_of(with_header(good, h)), ModelIoCode::Structural);

    h = header_of(good);
    h["layers"][2]["id"] = 7;
    EXPECT_EQ(code_of(with_header(good, h)), ModelIoCode::Structural);

    h = header_of(good);
    h["layers"][0]["shape"] = {5, 4};
    EXPECT_EQ(code_of(with_header(good, h)), ModelIoCode::Structural);

    h = header_of(good);
    h["layers"][2]["weight"] = h["layers"][0]["weight"];
    EXPECT_EQ(code_of(with_header(good, h)), ModelIoCode::Structural);

    h = header_of(good);
    h["layers"] = nlohmann::json::array();
    EXPECT_EQ(code_of(with_header(good, h)), ModelIoCode::NoPrunableLayers);

    EXPECT_EQ(code_of(with_header(good, "not an object")), ModelIoCode::Structural);
}

TEST(ModelIo, NormalizationOnlyModelHasNoPrunableLayers) {
    std::string bytes = serialize_model(testnets::tiny_mlp(1));
    auto h = header_of(bytes);
    nlohmann::json only = nlohmann::json::array({h["layers"][1]});
    only[0]["id"] = 1;
    h["layers"] = only;
    h["input_shape"] = {5};
    h["classes"] = 5;
    EXPECT_EQ(code_of(with_header(bytes, h)), ModelIoCode::NoPrunableLayers);
}

TEST(ModelIo, CodeNames) {
    EXPECT_EQ(to_string(ModelIoCode::ChecksumMismatch), "checksum-mismatch");
    EXPECT_EQ(to_string(ModelIoCode::NoPrunableLayers), "no-prunable-layers");
}
