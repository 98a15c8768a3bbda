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

#include "locpsi/paillier.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <utility>

#include "locpsi/errors.hpp"

namespace locpsi::paillier {

namespace {

constexpr int kPrimalityRounds = 64;
constexpr unsigned kMinSecureBits = 256;
constexpr unsigned kMinInsecureBits = 16;

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

std::size_t bit_width(const mpz_class& v) {
  return mpz_sizeinbase(v.get_mpz_t(), 2);
}

// g^m mod n^2. With g = n + 1 this is (1 + m*n) mod n^2, one multiplication
// instead of an exponentiation.
mpz_class generator_power(const PublicKey& pk, const mpz_class& m) {
  if (pk.g == pk.n + 1) {
    mpz_class v = 1 + m * pk.n;
    return v % pk.n_squared;
  }
  return powm(pk.g, m, pk.n_squared);
}

void check_plaintext_range(const PublicKey& pk, const mpz_class& m) {
  if (sgn(m) < 0 || m >= pk.n)
    throw RangeError("plaintext must lie in [0, n)");
}

void check_same_key(const KeyId& a, const KeyId& b, const char* what) {
  if (a != b)
    throw KeyMismatchError(std::string(what) + ": key ids differ (" +
                           fingerprint_hex(a) + " vs " + fingerprint_hex(b) + ")");
}

KeyId key_id_of_modulus(unsigned bits, const mpz_class& n) {
  auto encoded = to_fixed_be(n, (bits + 7) / 8);
  return fingerprint64(encoded);
}

// Random prime of exactly `bits` bits. The top two bits are forced so the
// product of two such primes always has full width.
mpz_class random_prime(unsigned bits, EntropySource& entropy) {
  for (;;) {
    mpz_class c = entropy.bits(bits);
    mpz_setbit(c.get_mpz_t(), bits - 1);
    mpz_setbit(c.get_mpz_t(), bits - 2);
    mpz_setbit(c.get_mpz_t(), 0);
    for (int step = 0; step < 4096; ++step) {
      if (bit_width(c) != bits) break;
      if (mpz_probab_prime_p(c.get_mpz_t(), kPrimalityRounds) != 0) return c;
      c += 2;
    }
  }
}

KeyPair keypair_from_parts(unsigned bits, const mpz_class& p, const mpz_class& q) {
  mpz_class n = p * q;
  PublicKey pub = PublicKey::from_modulus(bits, n);

  mpz_class p1 = p - 1, q1 = q - 1;
  mpz_class lambda;
  mpz_lcm(lambda.get_mpz_t(), p1.get_mpz_t(), q1.get_mpz_t());

  mpz_class glambda = powm(pub.g, lambda, pub.n_squared);
  mpz_class l = (glambda - 1) / n;
  mpz_class mu;
  if (mpz_invert(mu.get_mpz_t(), l.get_mpz_t(), n.get_mpz_t()) == 0)
    throw Error("key derivation failed: L(g^lambda) not invertible mod n");

  PrivateKey priv;
  priv.bits = bits;
  priv.n = n;
  priv.lambda = std::move(lambda);
  priv.mu = std::move(mu);
  priv.key_id = pub.key_id;
  return {std::move(pub), std::move(priv)};
}

}  // namespace

PublicKey PublicKey::from_modulus(unsigned bits, mpz_class n) {
  if (bits == 0 || bit_width(n) != bits)
    throw FormatError("modulus width does not match declared bit size");
  if (mpz_even_p(n.get_mpz_t()))
    throw FormatError("modulus must be odd");
  PublicKey pk;
  pk.bits = bits;
  pk.key_id = key_id_of_modulus(bits, n);
  pk.g = n + 1;
  pk.n_squared = n * n;
  pk.n = std::move(n);
  return pk;
}

std::vector<std::uint8_t> PublicKey::canonical_bytes() const {
  std::vector<std::uint8_t> out;
  put_u32_be(out, bits);
  auto nbytes = to_fixed_be(n, plaintext_width());
  out.insert(out.end(), nbytes.begin(), nbytes.end());
  return out;
}

PublicKey PublicKey::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw FormatError("public key encoding too short");
  unsigned bits = read_u32_be(bytes);
  std::size_t width = (bits + 7) / 8;
  if (bits == 0 || bytes.size() != 4 + width)
    throw FormatError("public key encoding has wrong length");
  return from_modulus(bits, from_fixed_be(bytes.subspan(4)));
}

std::vector<std::uint8_t> PrivateKey::serialize() const {
  std::vector<std::uint8_t> out;
  put_u32_be(out, bits);
  std::size_t width = (bits + 7) / 8;
  for (const mpz_class* part : {&n, &lambda, &mu}) {
    auto bytes = to_fixed_be(*part, width);
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  return out;
}

PrivateKey PrivateKey::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("private key encoding too short");
  unsigned bits = read_u32_be(bytes);
  std::size_t width = (bits + 7) / 8;
  if (bits == 0 || bytes.size() != 4 + 3 * width)
    throw FormatError("private key encoding has wrong length");
  PrivateKey sk;
  sk.bits = bits;
  sk.n = from_fixed_be(bytes.subspan(4, width));
  sk.lambda = from_fixed_be(bytes.subspan(4 + width, width));
  sk.mu = from_fixed_be(bytes.subspan(4 + 2 * width, width));
  if (bit_width(sk.n) != bits)
    throw FormatError("private key modulus width mismatch");
  sk.key_id = key_id_of_modulus(bits, sk.n);
  return sk;
}

std::vector<std::uint8_t> Ciphertext::serialize(const PublicKey& pk) const {
  check_same_key(key_id, pk.key_id, "ciphertext serialization");
  auto out = to_fixed_be(value, pk.ciphertext_width());
  out.insert(out.end(), key_id.begin(), key_id.end());
  return out;
}

Ciphertext Ciphertext::parse(std::span<const std::uint8_t> bytes,
                             const PublicKey& pk) {
  std::size_t width = pk.ciphertext_width();
  if (bytes.size() != width + std::tuple_size_v<KeyId>)
    throw FormatError("ciphertext encoding has wrong length");
  Ciphertext c{from_fixed_be(bytes.first(width)), pk.key_id};
  std::span<const std::uint8_t> tag = bytes.subspan(width);
  if (!std::equal(tag.begin(), tag.end(), pk.key_id.begin()))
    throw KeyMismatchError("ciphertext is tagged with a different key");
  if (sgn(c.value) <= 0 || c.value >= pk.n_squared)
    throw FormatError("ciphertext value outside (0, n^2)");
  return c;
}

KeyPair keygen(unsigned bits, EntropySource& entropy,
               const KeygenOptions& options) {
  unsigned min_bits = options.allow_insecure ? kMinInsecureBits : kMinSecureBits;
  if (bits < min_bits)
    throw RangeError("key width " + std::to_string(bits) +
                     " below minimum of " + std::to_string(min_bits));
  if (bits % 2 != 0) throw RangeError("key width must be even");

  for (;;) {
    mpz_class p = random_prime(bits / 2, entropy);
    mpz_class q = random_prime(bits / 2, entropy);
    if (p == q) continue;
    if (bit_width(mpz_class(p * q)) != bits) continue;  // unreachable by construction
    return keypair_from_parts(bits, p, q);
  }
}

Ciphertext encrypt(const PublicKey& pk, const mpz_class& m,
                   EntropySource& entropy) {
  check_plaintext_range(pk, m);
  mpz_class r = entropy.unit_below(pk.n);
  mpz_class value = generator_power(pk, m) * powm(r, pk.n, pk.n_squared);
  value %= pk.n_squared;
  return {std::move(value), pk.key_id};
}

mpz_class decrypt(const PrivateKey& sk, const Ciphertext& c) {
  check_same_key(sk.key_id, c.key_id, "decrypt");
  mpz_class n_squared = sk.n * sk.n;
  if (sgn(c.value) <= 0 || c.value >= n_squared)
    throw RangeError("ciphertext value outside (0, n^2)");
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), c.value.get_mpz_t(), n_squared.get_mpz_t());
  if (g != 1)
    throw FormatError("malformed ciphertext: value not invertible mod n^2");
  mpz_class l = (powm(c.value, sk.lambda, n_squared) - 1) / sk.n;
  mpz_class m = l * sk.mu;
  m %= sk.n;
  return m;
}

Ciphertext add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
  check_same_key(pk.key_id, c1.key_id, "add");
  check_same_key(pk.key_id, c2.key_id, "add");
  mpz_class value = c1.value * c2.value;
  value %= pk.n_squared;
  return {std::move(value), pk.key_id};
}

Ciphertext scalar_mul(const PublicKey& pk, const Ciphertext& c,
                      const mpz_class& s) {
  check_same_key(pk.key_id, c.key_id, "scalar_mul");
  if (sgn(s) < 0) throw RangeError("scalar must be non-negative");
  return {powm(c.value, s, pk.n_squared), pk.key_id};
}

Ciphertext encrypt_zero(const PublicKey& pk, EntropySource& entropy) {
  return encrypt_zero_with_randomness(pk, entropy.unit_below(pk.n));
}

Ciphertext encrypt_zero_with_randomness(const PublicKey& pk,
                                        const mpz_class& r) {
  if (sgn(r) <= 0 || r >= pk.n)
    throw RangeError("randomizer must lie in [1, n)");
  return {powm(r, pk.n, pk.n_squared), pk.key_id};
}

namespace {

// Fixed-base modular exponentiation with a radix-16 digit table:
// table[pos][d] = base^(d * 16^pos). An exponentiation then costs one
// multiplication per nonzero digit and no squarings, which is what makes the
// batched encryption path cheaper than a fresh full-width powm per message.
class FixedBasePow {
 public:
  FixedBasePow(const mpz_class& base, mpz_class modulus, std::size_t exp_bits)
      : modulus_(std::move(modulus)),
        positions_((exp_bits + kWindow - 1) / kWindow) {
    table_.reserve(positions_ * kDigits);
    mpz_class cur = base % modulus_;
    for (std::size_t pos = 0; pos < positions_; ++pos) {
      mpz_class t = 1;
      for (unsigned d = 1; d <= kDigits; ++d) {
        t *= cur;
        t %= modulus_;
        table_.push_back(t);
      }
      mpz_class next = table_.back() * cur;
      cur = next % modulus_;
    }
  }

  mpz_class pow(const mpz_class& exp) const {
    mpz_class acc = 1;
    for (std::size_t pos = 0; pos < positions_; ++pos) {
      unsigned digit = 0;
      for (unsigned b = 0; b < kWindow; ++b)
        digit |= mpz_tstbit(exp.get_mpz_t(), pos * kWindow + b) << b;
      if (digit != 0) {
        acc *= table_[pos * kDigits + digit - 1];
        acc %= modulus_;
      }
    }
    return acc;
  }

 private:
  static constexpr unsigned kWindow = 4;
  static constexpr unsigned kDigits = 15;  // 2^kWindow - 1
  mpz_class modulus_;
  std::size_t positions_;
  std::vector<mpz_class> table_;
};

// Table construction only pays off once the batch amortizes it.
constexpr std::size_t kFixedBaseThreshold = 16;

std::vector<Ciphertext> batch_encrypt_core(const PublicKey& pk,
                                           std::span<const mpz_class> messages,
                                           const mpz_class& exponent_bound,
                                           EntropySource& entropy) {
  for (const mpz_class& m : messages) check_plaintext_range(pk, m);

  mpz_class r0 = entropy.unit_below(pk.n);
  mpz_class rho = powm(r0, pk.n, pk.n_squared);

  std::optional<FixedBasePow> table;
  if (messages.size() >= kFixedBaseThreshold) {
    table.emplace(rho, pk.n_squared,
                  mpz_sizeinbase(exponent_bound.get_mpz_t(), 2));
  }

  std::vector<Ciphertext> out;
  out.reserve(messages.size());
  for (const mpz_class& m : messages) {
    mpz_class x = entropy.below(exponent_bound);
    mpz_class randomizer = table ? table->pow(x) : powm(rho, x, pk.n_squared);
    mpz_class value = generator_power(pk, m) * randomizer;
    value %= pk.n_squared;
    out.push_back({std::move(value), pk.key_id});
  }
  return out;
}

}  // namespace

std::vector<Ciphertext> batch_encrypt_fast(const PrivateKey& sk,
                                           const PublicKey& pk,
                                           std::span<const mpz_class> messages,
                                           EntropySource& entropy) {
  check_same_key(sk.key_id, pk.key_id, "batch_encrypt_fast");
  return batch_encrypt_core(pk, messages, sk.lambda, entropy);
}

std::vector<Ciphertext> batch_encrypt_fast_bounded(
    const PublicKey& pk, std::span<const mpz_class> messages,
    unsigned exponent_bits, EntropySource& entropy) {
  if (exponent_bits == 0 || exponent_bits > 2 * pk.bits)
    throw RangeError("exponent width out of range");
  mpz_class bound = 1;
  bound <<= exponent_bits;
  return batch_encrypt_core(pk, messages, bound, entropy);
}

namespace testing {

KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw RangeError("primes must be distinct");
  for (const mpz_class* v : {&p, &q}) {
    if (*v < 3 || mpz_probab_prime_p(v->get_mpz_t(), kPrimalityRounds) == 0)
      throw RangeError("factor is not an odd prime");
  }
  mpz_class n = p * q;
  return keypair_from_parts(static_cast<unsigned>(bit_width(n)), p, q);
}

}  // namespace testing

}  // namespace locpsi::paillier
