#include <array>

#include <openssl/evp.h>
#include <openssl/rand.h>

#include "mmla/error.hpp"
#include "mmla/store.hpp"

namespace mmla::store {
namespace {

std::string to_hex(const unsigned char* bytes, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(2 * n, '0');
  for (std::size_t i = 0; i < n; ++i) {
    out[2 * i] = kDigits[bytes[i] >> 4];
    out[2 * i + 1] = kDigits[bytes[i] & 0xF];
  }
  return out;
}

}  // namespace

std::string random_session_id() {
  std::array<unsigned char, 16> bytes{};
  if (RAND_bytes(bytes.data(), static_cast<int>(bytes.size())) != 1)
    throw Error(ErrorCode::StorageFailure, "system random generator unavailable");
  return to_hex(bytes.data(), bytes.size());
}

std::string learner_digest(std::string_view salt, std::string_view learner_ref) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  bool ok = ctx != nullptr && EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
            EVP_DigestUpdate(ctx, salt.data(), salt.size()) == 1 &&
            EVP_DigestUpdate(ctx, learner_ref.data(), learner_ref.size()) == 1 &&
            EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error(ErrorCode::StorageFailure, "SHA-256 digest failed");
  return to_hex(md.data(), len);
}

AnonymizationRecord anonymize(const ingest::SessionManifest& manifest, const SessionStore& store) {
  std::string id = random_session_id();
  while (store.contains(id)) id = random_session_id();
  return {std::move(id), learner_digest(store.salt(), manifest.learner_ref)};
}

}  // namespace mmla::store
