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

#include <cstddef>
#include <cstdint>

namespace locpsi {

// Source of random bytes with helpers for the integer distributions the
// cryptography needs. Implementations are not required to be thread-safe;
// give each worker thread its own source (SystemEntropy happens to be safe
// to share because it keeps no state).
class EntropySource {
 public:
  virtual ~EntropySource() = default;

  virtual void fill(std::uint8_t* out, std::size_t len) = 0;

  std::uint64_t u64();

  // Uniform in [0, 2^bit_count).
  mpz_class bits(std::size_t bit_count);

  // Uniform in [0, bound) by rejection sampling; bound must be positive.
  mpz_class below(const mpz_class& bound);

  // Uniform unit of the ring mod `modulus`: r in [1, modulus) with
  // gcd(r, modulus) = 1.
  mpz_class unit_below(const mpz_class& modulus);
};

// Operating-system entropy (getrandom). Stateless, safe to share across
// threads. Throws EntropyError if the kernel source fails.
class SystemEntropy final : public EntropySource {
 public:
  void fill(std::uint8_t* out, std::size_t len) override;
};

// Deterministic seeded generator (splitmix64). Reproducible test and
// benchmark inputs only; not cryptographically secure.
class SeededEntropy final : public EntropySource {
 public:
  explicit SeededEntropy(std::uint64_t seed) : state_(seed) {}
  void fill(std::uint8_t* out, std::size_t len) override;

 private:
  std::uint64_t next();
  std::uint64_t state_;
};

}  // namespace locpsi
