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

#include "locpsi/entropy.hpp"

#include <sys/random.h>

#include <cerrno>
#include <cstring>
#include <vector>

#include "locpsi/errors.hpp"

namespace locpsi {

std::uint64_t EntropySource::u64() {
  std::uint8_t buf[8];
  fill(buf, sizeof buf);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | buf[i];
  return v;
}

mpz_class EntropySource::bits(std::size_t bit_count) {
  if (bit_count == 0) return 0;
  std::vector<std::uint8_t> buf((bit_count + 7) / 8);
  fill(buf.data(), buf.size());
  mpz_class v;
  mpz_import(v.get_mpz_t(), buf.size(), 1, 1, 0, 0, buf.data());
  mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), bit_count);
  return v;
}

mpz_class EntropySource::below(const mpz_class& bound) {
  if (sgn(bound) <= 0) throw RangeError("sampling bound must be positive");
  std::size_t k = mpz_sizeinbase(bound.get_mpz_t(), 2);
  for (;;) {
    mpz_class v = bits(k);
    if (v < bound) return v;
  }
}

mpz_class EntropySource::unit_below(const mpz_class& modulus) {
  if (modulus <= 1) throw RangeError("modulus must exceed 1");
  for (;;) {
    mpz_class r = below(modulus);
    if (sgn(r) == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), modulus.get_mpz_t());
    if (g == 1) return r;
  }
}

void SystemEntropy::fill(std::uint8_t* out, std::size_t len) {
  std::size_t done = 0;
  while (done < len) {
    ssize_t n = getrandom(out + done, len - done, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw EntropyError(std::string("getrandom failed: ") +
                         std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::uint64_t SeededEntropy::next() {
  // splitmix64
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SeededEntropy::fill(std::uint8_t* out, std::size_t len) {
  std::size_t i = 0;
  while (i < len) {
    std::uint64_t v = next();
    for (int b = 0; b < 8 && i < len; ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
}

}  // namespace locpsi
