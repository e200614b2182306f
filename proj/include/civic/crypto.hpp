// Copyright 2026 The Civic Sense Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace civic {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex SHA-256 (64 chars).
std::string sha256_hex(std::span<const std::uint8_t> data);

/// `n` bytes from the OS CSPRNG, hex-encoded (2n chars).
std::string random_hex(std::size_t n);

/// PBKDF2-HMAC-SHA256, 32-byte output as hex.
std::string hash_credential(std::string_view credential, std::string_view salt_hex, int iterations);

bool constant_time_equal(std::string_view a, std::string_view b);

std::uint32_t crc32(std::span<const std::uint8_t> data);

std::string base64_encode(std::span<const std::uint8_t> data);
/// Throws Error(BadAttachment) on malformed input.
Bytes base64_decode(std::string_view text);

bool is_lower_hex(std::string_view s);

}  // namespace civic
