#include "mixprune/digest.hpp"

#include <array>

#include <openssl/evp.h>

#include "mixprune/errors.hpp"

namespace mixprune {

struct Sha256::Impl {
    EVP_MD_CTX* ctx = nullptr;
    bool finished = false;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
    impl_->ctx = EVP_MD_CTX_new();
    if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1) {
        throw Error("failed to initialise SHA-256");
    }
}

Sha256::~Sha256() {
    if (impl_ && impl_->ctx) EVP_MD_CTX_free(impl_->ctx);
}

Sha256& Sha256::update(const void* data, std::size_t bytes) {
    if (impl_->finished) throw InvariantError("SHA-256 updated after finalisation");
    if (bytes > 0 && EVP_DigestUpdate(impl_->ctx, data, bytes) != 1) throw Error("SHA-256 update failed");
    return *this;
}

Sha256& Sha256::update_u64(std::uint64_t value) {
    std::array<unsigned char, 8> le{};
    for (std::size_t i = 0; i < le.size(); ++i) le[i] = static_cast<unsigned char>(value >> (8 * i));
    return update(le.data(), le.size());
}

std::string Sha256::hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(impl_->ctx, out.data(), &len) != 1) throw Error("SHA-256 finalisation failed");
    impl_->finished = true;
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        s.push_back(kHex[out[i] >> 4]);
        s.push_back(kHex[out[i] & 0xF]);
    }
    return s;
}

std::string sha256_hex(std::string_view bytes) { return Sha256().update(bytes).hex(); }

}  // namespace mixprune
