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

#include "locpsi/client.hpp"

#include "locpsi/errors.hpp"
#include "locpsi/net.hpp"
#include "locpsi/wire.hpp"

namespace locpsi::client {

namespace {

wire::Message exchange(const std::string& addr, const wire::Message& request,
                       wire::MessageType expected) {
  net::Connection conn = net::Connection::dial(addr);
  wire::Message reply = conn.round_trip(request);
  if (reply.type == wire::MessageType::kError) {
    std::string code = reply.body.value("code", "UNKNOWN");
    std::string text = reply.body.value("message", "");
    throw RemoteError(code, text);
  }
  if (reply.type != expected)
    throw FormatError("unexpected reply type " + wire::type_name(reply.type));
  return reply;
}

}  // namespace

psi::PsiResponse run_query(const std::string& server_addr,
                           const psi::EncryptedQuery& query) {
  wire::Message request{wire::kVersion, wire::MessageType::kQuery,
                        wire::query_body(query)};
  wire::Message reply =
      exchange(server_addr, request, wire::MessageType::kResponse);
  return wire::parse_response_body(reply.body);
}

void ingest(const std::string& server_addr, const std::string& token,
            const grid::TrajectoryBitVector& v) {
  wire::Message request{wire::kVersion, wire::MessageType::kIngest,
                        wire::ingest_body(token, v)};
  exchange(server_addr, request, wire::MessageType::kIngest);
}

Fingerprint keys_put(const std::string& exchange_addr,
                     const paillier::PublicKey& pk) {
  wire::Message request{wire::kVersion, wire::MessageType::kKeysPut,
                        wire::keys_put_body(pk)};
  wire::Message reply =
      exchange(exchange_addr, request, wire::MessageType::kKeysPut);
  return fingerprint_from_hex(reply.body.at("key_id").get<std::string>());
}

paillier::PublicKey keys_get(const std::string& exchange_addr,
                             const Fingerprint& key_id) {
  wire::Message request{wire::kVersion, wire::MessageType::kKeysGet,
                        wire::keys_get_body(key_id)};
  wire::Message reply =
      exchange(exchange_addr, request, wire::MessageType::kKeysGet);
  return wire::parse_keys_put_body(reply.body);
}

std::vector<mpz_class> request_decrypt(
    const std::string& server_addr, const std::string& client_token,
    const paillier::PublicKey& server_pk,
    std::span<const paillier::Ciphertext> ciphertexts) {
  wire::Message request{
      wire::kVersion, wire::MessageType::kDecryptReq,
      wire::decrypt_req_body(client_token, server_pk, ciphertexts)};
  wire::Message reply =
      exchange(server_addr, request, wire::MessageType::kDecryptResp);
  return wire::parse_decrypt_resp_body(reply.body);
}

}  // namespace locpsi::client
