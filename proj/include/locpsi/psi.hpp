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

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "locpsi/grid.hpp"
#include "locpsi/paillier.hpp"

namespace locpsi::psi {

enum class Mode {
  kFull,         // client learns the intersection vector
  kCardinality,  // client learns only the intersection size
};

std::string mode_name(Mode mode);
Mode mode_from_name(std::string_view name);

// The client's message: one ciphertext per grid cell, encrypting the
// client's indicator bits under the client's own key.
struct EncryptedQuery {
  paillier::PublicKey pk;
  std::vector<paillier::Ciphertext> ciphertexts;
  grid::GridId grid_id{};
  Mode mode = Mode::kFull;
};

// The server's reply: per-cell ciphertexts in full mode, a single aggregate
// ciphertext in cardinality mode.
struct PsiResponse {
  Mode mode = Mode::kFull;
  grid::GridId grid_id{};
  std::vector<paillier::Ciphertext> payload;
};

// Client-side secrets for the on-device variant, needed to undo blinding
// after the decrypting server replies. Kept strictly on the client.
struct BlindState {
  Mode mode = Mode::kFull;
  grid::GridId grid_id{};
  std::uint64_t length = 0;
  mpz_class modulus;                   // decrypting key's n
  std::vector<std::uint64_t> scalars;  // full mode: nonzero per-position factors
  mpz_class offset;                    // cardinality mode: additive mask
};

// Result of replaying the evaluation without re-randomization, showing what
// a response computed as bare c_i^(server bit) would hand the client: the
// position-wise pattern reproduces the server's bits exactly. The re-run
// with re-randomization shows both telltale equalities gone.
struct LeakProbe {
  std::vector<std::uint8_t> naive_equals_query;  // d_i == c_i
  std::vector<std::uint8_t> naive_equals_one;    // d_i == 1
  bool naive_reproduces_server_bits = false;
  std::size_t rerandomized_equals_query = 0;
  std::size_t rerandomized_equals_one = 0;
};

// Encrypts the client's bit vector element-wise under its own key, using the
// batched fast path (the client owns the private key).
EncryptedQuery client_prepare_query(const paillier::PublicKey& pk,
                                    const paillier::PrivateKey& sk,
                                    const grid::TrajectoryBitVector& v,
                                    Mode mode, EntropySource& entropy);

// Full intersection: d_i = c_i^(server bit i) * fresh encryption of zero.
// Each d_i decrypts to (client bit i) AND (server bit i). Works only on
// ciphertexts; no decryption capability exists on this side. The per-cell
// work is independent; `workers` > 1 splits it across threads (randomizers
// are drawn from `entropy` up front, so the source needs no thread safety).
PsiResponse server_eval_full(const EncryptedQuery& query,
                             const grid::TrajectoryBitVector& server_bits,
                             EntropySource& entropy, unsigned workers = 1);

// Cardinality: d = (product of c_i with server bit 1) * one fresh encryption
// of zero. Decrypts to the intersection size.
PsiResponse server_eval_cardinality(const EncryptedQuery& query,
                                    const grid::TrajectoryBitVector& server_bits,
                                    EntropySource& entropy);

// Decrypts a full-mode response into the intersection indicator vector.
// Any decrypted value outside {0,1} is a protocol violation and throws.
grid::TrajectoryBitVector client_decode_full(const paillier::PrivateKey& sk,
                                             const PsiResponse& response);

// Decrypts a cardinality-mode response. Values above vector_length are a
// protocol violation and throw.
std::uint64_t client_decode_cardinality(const paillier::PrivateKey& sk,
                                        const PsiResponse& response,
                                        std::uint64_t vector_length);

// Demonstrates why the zero-encryption factor is mandatory. Test/demo only.
LeakProbe demonstrate_rerandomization_leak(
    const EncryptedQuery& query, const grid::TrajectoryBitVector& server_bits,
    EntropySource& entropy);

// On-device variant: the client holds only the decrypting server's public
// key and the server's published element-wise encrypted vector. It evaluates
// the intersection locally with its own bits as exponents, blinds the result
// (multiplicative per-position factors in full mode, one additive mask in
// cardinality mode) and returns the response to send for decryption plus the
// state needed to unblind the decrypted values.
std::pair<PsiResponse, BlindState> client_eval_blinded(
    const paillier::PublicKey& server_pk,
    std::span<const paillier::Ciphertext> encrypted_server_vector,
    const grid::TrajectoryBitVector& client_bits, Mode mode,
    EntropySource& entropy);

// Removes the cardinality blind: count = (decrypted - offset) mod n.
std::uint64_t client_unblind(const BlindState& state, const mpz_class& decrypted);

// Removes full-mode blinds: bit i is 1 iff the decrypted value is nonzero.
// An honest decryption is either 0 or exactly the position's blind factor;
// anything else throws.
grid::TrajectoryBitVector client_unblind(const BlindState& state,
                                         std::span<const mpz_class> decrypted);

}  // namespace locpsi::psi
