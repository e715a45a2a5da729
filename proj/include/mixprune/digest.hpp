#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace mixprune {

// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
  public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    Sha256& update(const void* data, std::size_t bytes);
    Sha256& update(std::string_view text) { return update(text.data(), text.size()); }
    template <typename T>
    Sha256& update(std::span<const T> values) {
        return update(values.data(), values.size_bytes());
    }
    Sha256& update_u64(std::uint64_t value);

    // Lowercase hex; the object cannot be updated afterwards.
    std::string hex();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace mixprune
