/*
 * Copyright 2026 The locpsi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace locpsi {

// 8-byte identifier derived from a canonical byte encoding (first 8 bytes of
// its SHA-256). Used to tag keys and grids.
using Fingerprint = std::array<std::uint8_t, 8>;

Fingerprint fingerprint64(std::span<const std::uint8_t> data);

std::string to_hex(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> from_hex(std::string_view hex);

std::string fingerprint_hex(const Fingerprint& fp);
Fingerprint fingerprint_from_hex(std::string_view hex);

// Canonical fixed-width big-endian integer encoding. Throws RangeError if the
// value is negative or does not fit in `width` bytes.
std::vector<std::uint8_t> to_fixed_be(const mpz_class& value, std::size_t width);
mpz_class from_fixed_be(std::span<const std::uint8_t> bytes);

// Padded base64 (RFC 4648). Decode rejects malformed input.
std::string base64_encode(std::span<const std::uint8_t> data);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Big-endian integer helpers for frames and file headers.
void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint32_t read_u32_be(std::span<const std::uint8_t> bytes);
std::uint64_t read_u64_be(std::span<const std::uint8_t> bytes);

}  // namespace locpsi
