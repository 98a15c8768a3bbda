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

#include <string>
#include <vector>

#include "locpsi/grid.hpp"
#include "locpsi/paillier.hpp"
#include "locpsi/psi.hpp"

namespace locpsi::client {

// One-shot request helpers. Each dials the server, exchanges one frame pair
// and maps a returned ERROR message to a thrown RemoteError.

psi::PsiResponse run_query(const std::string& server_addr,
                           const psi::EncryptedQuery& query);

void ingest(const std::string& server_addr, const std::string& token,
            const grid::TrajectoryBitVector& v);

Fingerprint keys_put(const std::string& exchange_addr,
                     const paillier::PublicKey& pk);

paillier::PublicKey keys_get(const std::string& exchange_addr,
                             const Fingerprint& key_id);

std::vector<mpz_class> request_decrypt(
    const std::string& server_addr, const std::string& client_token,
    const paillier::PublicKey& server_pk,
    std::span<const paillier::Ciphertext> ciphertexts);

}  // namespace locpsi::client
