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

#include "locpsi/psi.hpp"

#include <exception>
#include <mutex>
#include <thread>

#include "locpsi/errors.hpp"

namespace locpsi::psi {

namespace {

void check_binary(const grid::TrajectoryBitVector& v, const char* who) {
  for (std::uint8_t b : v.bits)
    if (b > 1) throw RangeError(std::string(who) + " vector is not binary");
}

void check_query_shape(const EncryptedQuery& q) {
  for (const auto& c : q.ciphertexts)
    if (c.key_id != q.pk.key_id)
      throw KeyMismatchError("query contains ciphertexts under a foreign key");
}

void check_grid_pair(const EncryptedQuery& q,
                     const grid::TrajectoryBitVector& server_bits) {
  if (q.grid_id != server_bits.grid_id)
    throw GridMismatchError("query and server vector use different grids");
  if (q.ciphertexts.size() != server_bits.bits.size())
    throw GridMismatchError("query and server vector lengths differ");
}

// Runs fn(i) for i in [0, count) across `workers` threads. The first
// exception, if any, is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  unsigned used = static_cast<unsigned>(
      std::min<std::size_t>(workers, count));
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (unsigned w = 0; w < used; ++w) {
    std::size_t begin = count * w / used;
    std::size_t end = count * (w + 1) / used;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::string mode_name(Mode mode) {
  return mode == Mode::kFull ? "FULL" : "CARDINALITY";
}

Mode mode_from_name(std::string_view name) {
  if (name == "FULL") return Mode::kFull;
  if (name == "CARDINALITY") return Mode::kCardinality;
  throw FormatError("unknown mode '" + std::string(name) + "'");
}

EncryptedQuery client_prepare_query(const paillier::PublicKey& pk,
                                    const paillier::PrivateKey& sk,
                                    const grid::TrajectoryBitVector& v,
                                    Mode mode, EntropySource& entropy) {
  check_binary(v, "client");
  std::vector<mpz_class> messages;
  messages.reserve(v.bits.size());
  for (std::uint8_t b : v.bits) messages.emplace_back(b);
  EncryptedQuery q;
  q.pk = pk;
  q.ciphertexts = paillier::batch_encrypt_fast(sk, pk, messages, entropy);
  q.grid_id = v.grid_id;
  q.mode = mode;
  return q;
}

PsiResponse server_eval_full(const EncryptedQuery& query,
                             const grid::TrajectoryBitVector& server_bits,
                             EntropySource& entropy, unsigned workers) {
  if (query.mode != Mode::kFull) throw RangeError("query mode is not FULL");
  check_query_shape(query);
  check_grid_pair(query, server_bits);
  check_binary(server_bits, "server");

  const std::size_t len = query.ciphertexts.size();
  std::vector<mpz_class> randomizers(len);
  for (auto& r : randomizers) r = entropy.unit_below(query.pk.n);

  std::vector<paillier::Ciphertext> payload(len);
  parallel_for(len, workers, [&](std::size_t i) {
    paillier::Ciphertext masked = paillier::scalar_mul(
        query.pk, query.ciphertexts[i], server_bits.bits[i]);
    payload[i] = paillier::add(
        query.pk, masked,
        paillier::encrypt_zero_with_randomness(query.pk, randomizers[i]));
  });
  return {Mode::kFull, query.grid_id, std::move(payload)};
}

PsiResponse server_eval_cardinality(const EncryptedQuery& query,
                                    const grid::TrajectoryBitVector& server_bits,
                                    EntropySource& entropy) {
  if (query.mode != Mode::kCardinality)
    throw RangeError("query mode is not CARDINALITY");
  check_query_shape(query);
  check_grid_pair(query, server_bits);
  check_binary(server_bits, "server");

  paillier::Ciphertext acc{1, query.pk.key_id};
  for (std::size_t i = 0; i < query.ciphertexts.size(); ++i) {
    if (server_bits.bits[i])
      acc = paillier::add(query.pk, acc, query.ciphertexts[i]);
  }
  // One re-randomizer on the aggregate, not one per element.
  acc = paillier::add(query.pk, acc, paillier::encrypt_zero(query.pk, entropy));
  return {Mode::kCardinality, query.grid_id, {std::move(acc)}};
}

grid::TrajectoryBitVector client_decode_full(const paillier::PrivateKey& sk,
                                             const PsiResponse& response) {
  if (response.mode != Mode::kFull)
    throw RangeError("response mode is not FULL");
  grid::TrajectoryBitVector out;
  out.grid_id = response.grid_id;
  out.bits.resize(response.payload.size());
  for (std::size_t i = 0; i < response.payload.size(); ++i) {
    mpz_class m = paillier::decrypt(sk, response.payload[i]);
    if (m > 1)
      throw ProtocolViolationError(
          "decoded intersection bit outside {0,1} at position " +
          std::to_string(i));
    out.bits[i] = static_cast<std::uint8_t>(m.get_ui());
  }
  return out;
}

std::uint64_t client_decode_cardinality(const paillier::PrivateKey& sk,
                                        const PsiResponse& response,
                                        std::uint64_t vector_length) {
  if (response.mode != Mode::kCardinality)
    throw RangeError("response mode is not CARDINALITY");
  if (response.payload.size() != 1)
    throw ProtocolViolationError("cardinality response must carry exactly one ciphertext");
  mpz_class m = paillier::decrypt(sk, response.payload[0]);
  if (m > vector_length)
    throw ProtocolViolationError("decoded cardinality exceeds vector length");
  return m.get_ui();
}

LeakProbe demonstrate_rerandomization_leak(
    const EncryptedQuery& query, const grid::TrajectoryBitVector& server_bits,
    EntropySource& entropy) {
  if (query.mode != Mode::kFull) throw RangeError("leak probe needs a FULL query");
  check_query_shape(query);
  check_grid_pair(query, server_bits);
  check_binary(server_bits, "server");

  const std::size_t len = query.ciphertexts.size();
  LeakProbe probe;
  probe.naive_equals_query.resize(len);
  probe.naive_equals_one.resize(len);
  probe.naive_reproduces_server_bits = true;
  for (std::size_t i = 0; i < len; ++i) {
    paillier::Ciphertext naive = paillier::scalar_mul(
        query.pk, query.ciphertexts[i], server_bits.bits[i]);
    probe.naive_equals_query[i] = naive.value == query.ciphertexts[i].value;
    probe.naive_equals_one[i] = naive.value == 1;
    bool expected_query = server_bits.bits[i] == 1;
    if (probe.naive_equals_query[i] != expected_query ||
        probe.naive_equals_one[i] != !expected_query)
      probe.naive_reproduces_server_bits = false;

    paillier::Ciphertext rerandomized = paillier::add(
        query.pk, naive, paillier::encrypt_zero(query.pk, entropy));
    if (rerandomized.value == query.ciphertexts[i].value)
      ++probe.rerandomized_equals_query;
    if (rerandomized.value == 1) ++probe.rerandomized_equals_one;
  }
  return probe;
}

std::pair<PsiResponse, BlindState> client_eval_blinded(
    const paillier::PublicKey& server_pk,
    std::span<const paillier::Ciphertext> encrypted_server_vector,
    const grid::TrajectoryBitVector& client_bits, Mode mode,
    EntropySource& entropy) {
  check_binary(client_bits, "client");
  if (encrypted_server_vector.size() != client_bits.bits.size())
    throw GridMismatchError("published vector and client vector lengths differ");
  for (const auto& c : encrypted_server_vector)
    if (c.key_id != server_pk.key_id)
      throw KeyMismatchError("published vector not under the server key");

  const std::size_t len = client_bits.bits.size();
  BlindState state;
  state.mode = mode;
  state.grid_id = client_bits.grid_id;
  state.length = len;
  state.modulus = server_pk.n;

  PsiResponse response;
  response.mode = mode;
  response.grid_id = client_bits.grid_id;

  if (mode == Mode::kFull) {
    state.scalars.reserve(len);
    response.payload.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
      paillier::Ciphertext d = paillier::scalar_mul(
          server_pk, encrypted_server_vector[i], client_bits.bits[i]);
      d = paillier::add(server_pk, d, paillier::encrypt_zero(server_pk, entropy));
      std::uint64_t s = 0;
      while (s == 0) s = entropy.u64();
      state.scalars.push_back(s);
      response.payload.push_back(paillier::scalar_mul(server_pk, d, s));
    }
  } else {
    paillier::Ciphertext acc{1, server_pk.key_id};
    for (std::size_t i = 0; i < len; ++i) {
      if (client_bits.bits[i])
        acc = paillier::add(server_pk, acc, encrypted_server_vector[i]);
    }
    acc = paillier::add(server_pk, acc,
                        paillier::encrypt_zero(server_pk, entropy));
    // Additive mask; the bound keeps count + offset from wrapping mod n.
    mpz_class bound = server_pk.n - mpz_class(static_cast<unsigned long>(len));
    state.offset = entropy.below(bound);
    acc = paillier::add(server_pk, acc,
                        paillier::encrypt(server_pk, state.offset, entropy));
    response.payload.push_back(std::move(acc));
  }
  return {std::move(response), std::move(state)};
}

std::uint64_t client_unblind(const BlindState& state, const mpz_class& decrypted) {
  if (state.mode != Mode::kCardinality)
    throw RangeError("state is not a cardinality blind");
  if (sgn(decrypted) < 0 || decrypted >= state.modulus)
    throw ProtocolViolationError("decrypted value outside [0, n)");
  mpz_class count = decrypted - state.offset;
  mpz_mod(count.get_mpz_t(), count.get_mpz_t(), state.modulus.get_mpz_t());
  if (count > state.length)
    throw ProtocolViolationError("unblinded cardinality exceeds vector length");
  return count.get_ui();
}

grid::TrajectoryBitVector client_unblind(const BlindState& state,
                                         std::span<const mpz_class> decrypted) {
  if (state.mode != Mode::kFull) throw RangeError("state is not a full-mode blind");
  if (decrypted.size() != state.length)
    throw ProtocolViolationError("decrypted sequence length mismatch");
  grid::TrajectoryBitVector out;
  out.grid_id = state.grid_id;
  out.bits.resize(decrypted.size());
  for (std::size_t i = 0; i < decrypted.size(); ++i) {
    if (sgn(decrypted[i]) != 0 && decrypted[i] != state.scalars[i])
      throw ProtocolViolationError(
          "decrypted value is neither 0 nor the blind factor at position " +
          std::to_string(i));
    out.bits[i] = sgn(decrypted[i]) != 0;
  }
  return out;
}

}  // namespace locpsi::psi
