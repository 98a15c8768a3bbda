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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "locpsi/entropy.hpp"
#include "locpsi/paillier.hpp"
#include "locpsi/psi.hpp"

namespace locpsi::bench {

// One protocol run with random vectors, timed stage by stage. Byte counts
// are the exact frame sizes the wire transport would carry for the query and
// response messages. The decoded result is checked against the plaintext
// answer before any timing is trusted.
struct BenchResult {
  std::uint64_t set_size = 0;
  unsigned key_bits = 0;
  psi::Mode mode = psi::Mode::kFull;
  double server_time_s = 0;
  double client_encrypt_time_s = 0;
  double client_decrypt_time_s = 0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  unsigned workers = 1;
  bool ok = false;
  std::string error;
};

// Generates keys on demand and reuses them across cells of the same width.
class KeyCache {
 public:
  const paillier::KeyPair& get(unsigned bits, EntropySource& entropy);

 private:
  std::map<unsigned, paillier::KeyPair> keys_;
};

BenchResult run_cell(std::uint64_t set_size, unsigned key_bits, psi::Mode mode,
                     KeyCache& keys, EntropySource& entropy,
                     unsigned workers = 1);

std::string csv_header();
std::string csv_row(const BenchResult& r, const std::string& timestamp);

// "1024", "2^10", and doubling ranges "2^10..2^14".
std::vector<std::uint64_t> parse_size_list(const std::string& spec);
std::vector<unsigned> parse_bits_list(const std::string& spec);

// Ratio of server time per size doubling and per key-width doubling,
// computed from a finished result matrix.
struct TrendSummary {
  struct Ratio {
    std::string label;
    double value = 0;
  };
  std::vector<Ratio> per_size_doubling;
  std::vector<Ratio> per_bits_doubling;
};
TrendSummary summarize_trends(const std::vector<BenchResult>& results);

}  // namespace locpsi::bench
