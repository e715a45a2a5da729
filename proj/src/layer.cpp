#include "mixprune/layer.hpp"

#include <array>
#include <utility>

#include <fmt/format.h>

#include "mixprune/errors.hpp"

namespace mixprune {

namespace {
constexpr std::array<std::pair<LayerRole, std::string_view>, 5> kRoleNames{{
    {LayerRole::Dense, "Dense"},
    {LayerRole::Conv2D, "Conv2D"},
    {LayerRole::Normalization, "Normalization"},
    {LayerRole::PatchEmbedding, "PatchEmbedding"},
    {LayerRole::ClassifierHead, "ClassifierHead"},
}};
}  // namespace

std::string_view to_string(LayerRole role) {
    for (const auto& [r, name] : kRoleNames)
        if (r == role) return name;
    return "Unknown";
}

std::string_view to_string(Activation act) { return act == Activation::ReLU ? "relu" : "none"; }

LayerRole parse_role(std::string_view name) {
    for (const auto& [r, n] : kRoleNames)
        if (n == name) return r;
    throw InputError(fmt::format("unknown layer role '{}'", name));
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "none") return Activation::None;
    throw InputError(fmt::format("unknown activation '{}'", name));
}

}  // namespace mixprune
