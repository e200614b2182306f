// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#include "civic/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/rand.h>
#include <zlib.h>

#include <array>

#include "civic/error.hpp"

namespace civic {
namespace {

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::StorageFailure, "sha256 failed");
  }
  return to_hex({digest.data(), len});
}

std::string random_hex(std::size_t n) {
  Bytes buf(n);
  if (RAND_bytes(buf.data(), static_cast<int>(n)) != 1) {
    throw Error(ErrorCode::StorageFailure, "CSPRNG unavailable");
  }
  return to_hex(buf);
}

std::string hash_credential(std::string_view credential, std::string_view salt_hex, int iterations) {
  std::array<std::uint8_t, 32> out{};
  if (PKCS5_PBKDF2_HMAC(credential.data(), static_cast<int>(credential.size()),
                        reinterpret_cast<const unsigned char*>(salt_hex.data()), static_cast<int>(salt_hex.size()),
                        iterations, EVP_sha256(), static_cast<int>(out.size()), out.data()) != 1) {
    throw Error(ErrorCode::StorageFailure, "pbkdf2 failed");
  }
  return to_hex(out);
}

bool constant_time_equal(std::string_view a, std::string_view b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

std::uint32_t crc32(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(::crc32(0L, data.data(), static_cast<uInt>(data.size())));
}

std::string base64_encode(std::span<const std::uint8_t> data) {
  std::string out(4 * ((data.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data.data(),
                                static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(ErrorCode::BadAttachment, "attachment_data is not valid base64");
  Bytes out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw Error(ErrorCode::BadAttachment, "attachment_data is not valid base64");
  // EVP_DecodeBlock keeps the padding bytes as zeros
  std::size_t len = static_cast<std::size_t>(n);
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() > 1 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

bool is_lower_hex(std::string_view s) {
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace civic
