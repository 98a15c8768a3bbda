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

// Wall-clock comparison of the batched fast-encryption path against
// independent encrypt() calls. Kept out of the regular unit suites because a
// 2048-bit run takes the better part of a minute.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cstdio>

#include "locpsi/paillier.hpp"

using namespace locpsi;
using namespace locpsi::paillier;

TEST_CASE("batched fast encryption beats per-message encryption at 2048 bits") {
  SeededEntropy entropy(111);
  KeyPair kp = keygen(2048, entropy);

  constexpr std::size_t kCount = 1 << 12;
  std::vector<mpz_class> messages;
  messages.reserve(kCount);
  for (std::size_t i = 0; i < kCount; ++i)
    messages.push_back(mpz_class(static_cast<unsigned long>(i % 2)));

  using Clock = std::chrono::steady_clock;

  auto t0 = Clock::now();
  std::vector<Ciphertext> fast = batch_encrypt_fast(kp.priv, kp.pub, messages, entropy);
  auto t1 = Clock::now();
  std::vector<Ciphertext> standard;
  standard.reserve(kCount);
  for (const mpz_class& m : messages)
    standard.push_back(encrypt(kp.pub, m, entropy));
  auto t2 = Clock::now();

  double fast_s = std::chrono::duration<double>(t1 - t0).count();
  double standard_s = std::chrono::duration<double>(t2 - t1).count();
  std::printf("fast: %.2fs  standard: %.2fs  speedup: %.2fx\n", fast_s,
              standard_s, standard_s / fast_s);

  CHECK(fast_s < standard_s);

  // Spot-check plaintext equivalence on a stride; the full-batch decrypt
  // equivalence is covered in the unit and acceptance suites.
  for (std::size_t i = 0; i < kCount; i += 256) {
    CHECK(decrypt(kp.priv, fast[i]) == messages[i]);
    CHECK(decrypt(kp.priv, standard[i]) == messages[i]);
  }
}
