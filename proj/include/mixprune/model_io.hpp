#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "mixprune/errors.hpp"
#include "mixprune/network.hpp"

namespace mixprune {

// Model file layout, all integers little-endian:
//
//   "SMIX"            4 bytes
//   version           u32
//   header length     u32, bytes of the header that follows
//   header            UTF-8 JSON: model metadata and the layer table
//   payload           raw little-endian fp32 values
//
// Every layer record names the byte offset and length of its weight, bias and
// (for normalization) running statistics inside the payload. The header also
// carries the SHA-256 of the payload.
inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelIoCode {
    Io,
    BadMagic,
    VersionMismatch,
    Truncated,
    ChecksumMismatch,
    Structural,
    NoPrunableLayers,
};

std::string_view to_string(ModelIoCode code);

class ModelIoError : public Error {
  public:
    ModelIoError(ModelIoCode code, const std::string& what) : Error(what), code_(code) {}
    ModelIoCode code() const noexcept { return code_; }

  private:
    ModelIoCode code_;
};

std::string serialize_model(const Network& net);
// Validates the whole file before building anything; on failure no partial
// network escapes.
Network deserialize_model(std::string_view bytes);

// Writes to a temporary sibling and renames it into place.
void save_model(const Network& net, const std::filesystem::path& path);
Network load_model(const std::filesystem::path& path);

// Whole-file helpers shared by the writers in this library.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace mixprune
