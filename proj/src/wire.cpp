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

#include "locpsi/wire.hpp"

#include <algorithm>

#include "locpsi/errors.hpp"

namespace locpsi::wire {

using nlohmann::json;

namespace {

const json& field(const json& body, const char* name) {
  auto it = body.find(name);
  if (it == body.end())
    throw FormatError(std::string("missing field '") + name + "'");
  return *it;
}

std::string str_field(const json& body, const char* name) {
  const json& f = field(body, name);
  if (!f.is_string())
    throw FormatError(std::string("field '") + name + "' must be a string");
  return f.get<std::string>();
}

std::uint64_t uint_field(const json& body, const char* name) {
  const json& f = field(body, name);
  if (!f.is_number_unsigned())
    throw FormatError(std::string("field '") + name +
                      "' must be a non-negative integer");
  return f.get<std::uint64_t>();
}

std::vector<std::uint8_t> b64_field(const json& body, const char* name) {
  return base64_decode(str_field(body, name));
}

Fingerprint fingerprint_field(const json& body, const char* name) {
  return fingerprint_from_hex(str_field(body, name));
}

json encode_public_key(const paillier::PublicKey& pk) {
  return json{{"bits", pk.bits},
              {"n", base64_encode(to_fixed_be(pk.n, pk.plaintext_width()))}};
}

paillier::PublicKey decode_public_key(const json& j) {
  if (!j.is_object()) throw FormatError("public_key must be an object");
  std::uint64_t bits = uint_field(j, "bits");
  if (bits == 0 || bits > 1u << 20) throw FormatError("key width out of range");
  auto n_bytes = b64_field(j, "n");
  if (n_bytes.size() != (bits + 7) / 8)
    throw FormatError("modulus is not the fixed width implied by 'bits'");
  return paillier::PublicKey::from_modulus(static_cast<unsigned>(bits),
                                           from_fixed_be(n_bytes));
}

std::vector<std::vector<std::uint8_t>> decode_fixed_list(const json& j,
                                                         std::size_t width) {
  if (!j.is_array()) throw FormatError("expected an array of base64 strings");
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_string()) throw FormatError("array element must be a string");
    auto bytes = base64_decode(e.get<std::string>());
    if (bytes.size() != width)
      throw FormatError("encoded integer is not the expected fixed width");
    out.push_back(std::move(bytes));
  }
  return out;
}

}  // namespace

std::string type_name(MessageType type) {
  switch (type) {
    case MessageType::kQuery: return "QUERY";
    case MessageType::kResponse: return "RESPONSE";
    case MessageType::kIngest: return "INGEST";
    case MessageType::kKeysGet: return "KEYS_GET";
    case MessageType::kKeysPut: return "KEYS_PUT";
    case MessageType::kDecryptReq: return "DECRYPT_REQ";
    case MessageType::kDecryptResp: return "DECRYPT_RESP";
    case MessageType::kError: return "ERROR";
  }
  throw Error("unreachable message type");
}

MessageType type_from_name(std::string_view name) {
  if (name == "QUERY") return MessageType::kQuery;
  if (name == "RESPONSE") return MessageType::kResponse;
  if (name == "INGEST") return MessageType::kIngest;
  if (name == "KEYS_GET") return MessageType::kKeysGet;
  if (name == "KEYS_PUT") return MessageType::kKeysPut;
  if (name == "DECRYPT_REQ") return MessageType::kDecryptReq;
  if (name == "DECRYPT_RESP") return MessageType::kDecryptResp;
  if (name == "ERROR") return MessageType::kError;
  throw FormatError("unknown message type '" + std::string(name) + "'");
}

std::vector<std::uint8_t> serialize(const Message& msg) {
  json j{{"version", msg.version},
         {"type", type_name(msg.type)},
         {"body", msg.body}};
  std::string text = j.dump();
  return {text.begin(), text.end()};
}

Message parse(std::span<const std::uint8_t> bytes) {
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw FormatError(std::string("message is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("message must be a JSON object");
  const json& version = field(j, "version");
  if (!version.is_number_integer() || version.get<int>() != kVersion)
    throw FormatError("unsupported protocol version");
  Message msg;
  msg.version = kVersion;
  msg.type = type_from_name(str_field(j, "type"));
  msg.body = field(j, "body");
  return msg;
}

std::size_t frame_size(const Message& msg) {
  return 4 + serialize(msg).size();
}

Message make_error(const std::string& code, const std::string& text) {
  return {kVersion, MessageType::kError, json{{"code", code}, {"message", text}}};
}

json query_body(const psi::EncryptedQuery& query) {
  json cts = json::array();
  for (const auto& c : query.ciphertexts)
    cts.push_back(base64_encode(c.serialize(query.pk)));
  return json{{"mode", psi::mode_name(query.mode)},
              {"grid_id", fingerprint_hex(query.grid_id)},
              {"public_key", encode_public_key(query.pk)},
              {"ciphertexts", std::move(cts)}};
}

// Canonical ciphertext blobs are the fixed-width big-endian value followed
// by the 8-byte id of the producing key.
constexpr std::size_t kKeyIdBytes = std::tuple_size_v<Fingerprint>;

psi::EncryptedQuery parse_query_body(const json& body) {
  psi::EncryptedQuery q;
  q.mode = psi::mode_from_name(str_field(body, "mode"));
  q.grid_id = fingerprint_field(body, "grid_id");
  q.pk = decode_public_key(field(body, "public_key"));
  auto raw = decode_fixed_list(field(body, "ciphertexts"),
                               q.pk.ciphertext_width() + kKeyIdBytes);
  q.ciphertexts.reserve(raw.size());
  for (const auto& bytes : raw)
    q.ciphertexts.push_back(paillier::Ciphertext::parse(bytes, q.pk));
  return q;
}

json response_body(const psi::PsiResponse& response,
                   const paillier::PublicKey& pk) {
  json payload = json::array();
  for (const auto& c : response.payload)
    payload.push_back(base64_encode(c.serialize(pk)));
  return json{{"mode", psi::mode_name(response.mode)},
              {"grid_id", fingerprint_hex(response.grid_id)},
              {"key_bits", pk.bits},
              {"key_id", fingerprint_hex(pk.key_id)},
              {"payload", std::move(payload)}};
}

psi::PsiResponse parse_response_body(const json& body) {
  psi::PsiResponse r;
  r.mode = psi::mode_from_name(str_field(body, "mode"));
  r.grid_id = fingerprint_field(body, "grid_id");
  std::uint64_t bits = uint_field(body, "key_bits");
  if (bits == 0 || bits > 1u << 20) throw FormatError("key width out of range");
  Fingerprint key_id = fingerprint_field(body, "key_id");
  std::size_t width = (2 * static_cast<std::size_t>(bits) + 7) / 8;
  auto raw = decode_fixed_list(field(body, "payload"), width + kKeyIdBytes);
  if (r.mode == psi::Mode::kCardinality && raw.size() != 1)
    throw FormatError("cardinality response must carry exactly one ciphertext");
  r.payload.reserve(raw.size());
  for (const auto& bytes : raw) {
    if (!std::equal(bytes.begin() + static_cast<std::ptrdiff_t>(width),
                    bytes.end(), key_id.begin()))
      throw FormatError("payload ciphertext tagged with a different key");
    r.payload.push_back(paillier::Ciphertext{
        from_fixed_be(std::span(bytes).first(width)), key_id});
  }
  return r;
}

json ingest_body(const std::string& token, const grid::TrajectoryBitVector& v) {
  return json{{"token", token}, {"bitvector", base64_encode(v.serialize())}};
}

IngestBody parse_ingest_body(const json& body) {
  IngestBody out;
  out.token = str_field(body, "token");
  out.vector = grid::TrajectoryBitVector::deserialize(b64_field(body, "bitvector"));
  return out;
}

json keys_put_body(const paillier::PublicKey& pk) {
  return json{{"public_key", encode_public_key(pk)}};
}

paillier::PublicKey parse_keys_put_body(const json& body) {
  return decode_public_key(field(body, "public_key"));
}

json keys_get_body(const Fingerprint& key_id) {
  return json{{"key_id", fingerprint_hex(key_id)}};
}

Fingerprint parse_keys_get_body(const json& body) {
  return fingerprint_field(body, "key_id");
}

json decrypt_req_body(const std::string& client_token,
                      const paillier::PublicKey& server_pk,
                      std::span<const paillier::Ciphertext> cts) {
  json list = json::array();
  for (const auto& c : cts) list.push_back(base64_encode(c.serialize(server_pk)));
  return json{{"client_token", client_token},
              {"key_id", fingerprint_hex(server_pk.key_id)},
              {"key_bits", server_pk.bits},
              {"ciphertexts", std::move(list)}};
}

DecryptReqBody parse_decrypt_req_body(const json& body) {
  DecryptReqBody out;
  out.client_token = str_field(body, "client_token");
  out.key_id = fingerprint_field(body, "key_id");
  std::uint64_t bits = uint_field(body, "key_bits");
  if (bits == 0 || bits > 1u << 20) throw FormatError("key width out of range");
  std::size_t width = (2 * static_cast<std::size_t>(bits) + 7) / 8;
  out.ciphertexts = decode_fixed_list(field(body, "ciphertexts"), width + kKeyIdBytes);
  return out;
}

json decrypt_resp_body(const paillier::PublicKey& pk,
                       std::span<const mpz_class> values) {
  json list = json::array();
  for (const auto& v : values)
    list.push_back(base64_encode(to_fixed_be(v, pk.plaintext_width())));
  return json{{"key_id", fingerprint_hex(pk.key_id)},
              {"key_bits", pk.bits},
              {"values", std::move(list)}};
}

std::vector<mpz_class> parse_decrypt_resp_body(const json& body) {
  std::uint64_t bits = uint_field(body, "key_bits");
  if (bits == 0 || bits > 1u << 20) throw FormatError("key width out of range");
  std::size_t width = (static_cast<std::size_t>(bits) + 7) / 8;
  auto raw = decode_fixed_list(field(body, "values"), width);
  std::vector<mpz_class> out;
  out.reserve(raw.size());
  for (const auto& bytes : raw) out.push_back(from_fixed_be(bytes));
  return out;
}

}  // namespace locpsi::wire
