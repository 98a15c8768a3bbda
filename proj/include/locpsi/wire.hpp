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

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "locpsi/grid.hpp"
#include "locpsi/paillier.hpp"
#include "locpsi/psi.hpp"

namespace locpsi::wire {

inline constexpr int kVersion = 1;

// Frames on the stream are a 4-byte big-endian payload length followed by
// the payload: one JSON document per message. Big integers inside bodies are
// fixed-width big-endian byte strings in padded base64.
inline constexpr std::size_t kMaxFrameBytes = std::size_t{1} << 30;

enum class MessageType {
  kQuery,
  kResponse,
  kIngest,
  kKeysGet,
  kKeysPut,
  kDecryptReq,
  kDecryptResp,
  kError,
};

std::string type_name(MessageType type);
MessageType type_from_name(std::string_view name);

struct Message {
  int version = kVersion;
  MessageType type = MessageType::kError;
  nlohmann::json body;
};

std::vector<std::uint8_t> serialize(const Message& msg);
Message parse(std::span<const std::uint8_t> bytes);

std::size_t frame_size(const Message& msg);

// Error codes carried in ERROR bodies.
inline constexpr const char* kErrRateLimited = "RATE_LIMITED";
inline constexpr const char* kErrBadGrid = "BAD_GRID";
inline constexpr const char* kErrMalformed = "MALFORMED";
inline constexpr const char* kErrUnauthorized = "UNAUTHORIZED";
inline constexpr const char* kErrUnknownKey = "UNKNOWN_KEY";
inline constexpr const char* kErrConflict = "CONFLICT";
inline constexpr const char* kErrWrongRole = "WRONG_ROLE";
inline constexpr const char* kErrUnsupported = "UNSUPPORTED";
inline constexpr const char* kErrKeyMismatch = "KEY_MISMATCH";
inline constexpr const char* kErrInternal = "INTERNAL";

Message make_error(const std::string& code, const std::string& text);

// Body builders and parsers. Parsers validate shape, fixed widths and
// ranges, throwing FormatError on anything off.

nlohmann::json query_body(const psi::EncryptedQuery& query);
psi::EncryptedQuery parse_query_body(const nlohmann::json& body);

nlohmann::json response_body(const psi::PsiResponse& response,
                             const paillier::PublicKey& pk);
psi::PsiResponse parse_response_body(const nlohmann::json& body);

nlohmann::json ingest_body(const std::string& token,
                           const grid::TrajectoryBitVector& v);
struct IngestBody {
  std::string token;
  grid::TrajectoryBitVector vector;
};
IngestBody parse_ingest_body(const nlohmann::json& body);

nlohmann::json keys_put_body(const paillier::PublicKey& pk);
paillier::PublicKey parse_keys_put_body(const nlohmann::json& body);

nlohmann::json keys_get_body(const Fingerprint& key_id);
Fingerprint parse_keys_get_body(const nlohmann::json& body);

nlohmann::json decrypt_req_body(const std::string& client_token,
                                const paillier::PublicKey& server_pk,
                                std::span<const paillier::Ciphertext> cts);
struct DecryptReqBody {
  std::string client_token;
  Fingerprint key_id{};
  std::vector<std::vector<std::uint8_t>> ciphertexts;  // raw fixed-width
};
DecryptReqBody parse_decrypt_req_body(const nlohmann::json& body);

nlohmann::json decrypt_resp_body(const paillier::PublicKey& pk,
                                 std::span<const mpz_class> values);
std::vector<mpz_class> parse_decrypt_resp_body(const nlohmann::json& body);

}  // namespace locpsi::wire
