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

#include <cstdint>
#include <span>
#include <vector>

#include "locpsi/encoding.hpp"
#include "locpsi/entropy.hpp"

namespace locpsi::paillier {

using KeyId = Fingerprint;

// Public half of a keypair: modulus n (product of two equal-width primes)
// and generator g of the ring mod n^2. Keys generated here always use
// g = n + 1, which makes g^m mod n^2 computable with a single multiplication.
// key_id is the first 8 bytes of SHA-256 over n's fixed-width big-endian
// encoding, so equal moduli always yield equal ids.
struct PublicKey {
  unsigned bits = 0;  // modulus width in bits
  mpz_class n;
  mpz_class g;
  mpz_class n_squared;
  KeyId key_id{};

  static PublicKey from_modulus(unsigned bits, mpz_class n);

  // Canonical wire encoding: u32 big-endian bit width, then n as a
  // fixed-width big-endian byte string.
  std::vector<std::uint8_t> canonical_bytes() const;
  static PublicKey parse(std::span<const std::uint8_t> bytes);

  std::size_t plaintext_width() const { return (bits + 7) / 8; }
  std::size_t ciphertext_width() const { return (2 * bits + 7) / 8; }
};

// Decryption half: lambda = lcm(p-1, q-1) and mu, the inverse of
// L(g^lambda mod n^2) mod n where L(x) = (x-1)/n.
struct PrivateKey {
  unsigned bits = 0;
  mpz_class n;
  mpz_class lambda;
  mpz_class mu;
  KeyId key_id{};

  std::vector<std::uint8_t> serialize() const;
  static PrivateKey parse(std::span<const std::uint8_t> bytes);
};

struct KeyPair {
  PublicKey pub;
  PrivateKey priv;
};

// Element of the ring mod n^2, tagged with the key that produced it.
struct Ciphertext {
  mpz_class value;
  KeyId key_id{};

  std::vector<std::uint8_t> serialize(const PublicKey& pk) const;
  static Ciphertext parse(std::span<const std::uint8_t> bytes,
                          const PublicKey& pk);
};

struct KeygenOptions {
  // Permits widths below 256 bits. Toy keys for tests only.
  bool allow_insecure = false;
};

// Generates a fresh keypair with two distinct primes of bits/2 each, checked
// with 64 rounds of probabilistic primality testing. `bits` must be even and
// at least 256 (16 with allow_insecure). n is guaranteed exactly `bits` wide.
KeyPair keygen(unsigned bits, EntropySource& entropy,
               const KeygenOptions& options = {});

// c = g^m * r^n mod n^2 for fresh r in [1, n) coprime to n.
// Requires 0 <= m < n.
Ciphertext encrypt(const PublicKey& pk, const mpz_class& m,
                   EntropySource& entropy);

// m = L(c^lambda mod n^2) * mu mod n. Rejects ciphertexts from other keys
// and values outside (0, n^2) or not invertible mod n^2.
mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c);

// Multiplying ciphertexts adds plaintexts: decrypt(add(E(a), E(b))) =
// (a + b) mod n.
Ciphertext add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);

// Exponentiating a ciphertext scales its plaintext: decrypt(c^s) =
// s * m mod n. s must be non-negative; s = 0 yields the ciphertext 1,
// which decrypts to 0.
Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& c,
                      const mpz_class& s);

// Fresh encryption of zero (value r^n mod n^2). Multiplying any ciphertext
// by it re-randomizes the ciphertext without changing the plaintext.
Ciphertext encrypt_zero(const PublicKey& pk, EntropySource& entropy);

// Deterministic form of encrypt_zero for callers that manage randomness
// themselves, e.g. drawing every r up front before fanning work out across
// threads. r must be in [1, n) and coprime to n.
Ciphertext encrypt_zero_with_randomness(const PublicKey& pk,
                                        const mpz_class& r);

// Batched encryption that replaces the per-message r^n exponentiation with a
// cheaper one. A single random r0 is fixed for the batch, rho = r0^n mod n^2
// is computed once, and each message m becomes g^m * rho^x mod n^2 with a
// fresh exponent x uniform in [0, lambda - 1]. Requires the private key,
// which is why only the key owner (the querying client encrypting its own
// vector) can use this form. Outputs are plaintext-equivalent to encrypt().
std::vector<Ciphertext> batch_encrypt_fast(const PrivateKey& sk,
                                           const PublicKey& pk,
                                           std::span<const mpz_class> messages,
                                           EntropySource& entropy);

// Public-key-only variant drawing x uniform in [0, 2^exponent_bits). Much
// faster for small exponent widths, but the batch's randomizers span only
// 2^exponent_bits values: if any one plaintext of the batch leaks, an
// adversary can recover the rest in O(2^exponent_bits) trial decryptions.
std::vector<Ciphertext> batch_encrypt_fast_bounded(
    const PublicKey& pk, std::span<const mpz_class> messages,
    unsigned exponent_bits, EntropySource& entropy);

namespace testing {

// Builds a keypair from caller-chosen primes so tiny cases (n = 35) can be
// cross-checked against direct small-integer arithmetic. Deliberately
// separate from keygen(): production key generation never accepts primes
// from outside.
KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q);

}  // namespace testing

}  // namespace locpsi::paillier
