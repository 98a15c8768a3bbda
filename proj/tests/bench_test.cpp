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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "locpsi/bench.hpp"
#include "locpsi/errors.hpp"

using namespace locpsi;
using namespace locpsi::bench;

TEST_CASE("size and width lists parse all supported spellings") {
  CHECK(parse_size_list("1024") == std::vector<std::uint64_t>{1024});
  CHECK(parse_size_list("2^4") == std::vector<std::uint64_t>{16});
  CHECK(parse_size_list("2^4..2^6") == std::vector<std::uint64_t>{16, 32, 64});
  CHECK(parse_size_list("8,2^5") == std::vector<std::uint64_t>{8, 32});
  CHECK_THROWS_AS(parse_size_list("banana"), FormatError);
  CHECK_THROWS_AS(parse_size_list("2^6..2^4"), FormatError);

  CHECK(parse_bits_list("512,1024") == std::vector<unsigned>{512, 1024});
  CHECK_THROWS_AS(parse_bits_list("x"), FormatError);
}

TEST_CASE("a tiny cell completes and its output is oracle-checked") {
  SeededEntropy entropy(91);
  KeyCache keys;
  BenchResult full = run_cell(16, 512, psi::Mode::kFull, keys, entropy);
  CHECK(full.ok);
  CHECK(full.error.empty());
  CHECK(full.server_time_s >= 0);
  CHECK(full.client_encrypt_time_s >= 0);
  CHECK(full.client_decrypt_time_s >= 0);
  CHECK(full.bytes_up > 0);
  CHECK(full.bytes_down > 0);

  BenchResult card = run_cell(16, 512, psi::Mode::kCardinality, keys, entropy);
  CHECK(card.ok);
  // Full responses carry one ciphertext per cell; cardinality exactly one.
  CHECK(card.bytes_down < full.bytes_down);
}

TEST_CASE("cardinality download size does not grow with the vector") {
  SeededEntropy entropy(92);
  KeyCache keys;
  BenchResult small = run_cell(1 << 6, 512, psi::Mode::kCardinality, keys, entropy);
  BenchResult large = run_cell(1 << 10, 512, psi::Mode::kCardinality, keys, entropy);
  REQUIRE(small.ok);
  REQUIRE(large.ok);
  CHECK(small.bytes_down == large.bytes_down);
  CHECK(large.bytes_up > small.bytes_up);
}

TEST_CASE("csv rows follow the fixed schema") {
  CHECK(csv_header() ==
        "set_size,key_bits,mode,server_time_s,client_encrypt_time_s,"
        "client_decrypt_time_s,bytes_up,bytes_down,worker_count,timestamp\n");
  BenchResult r;
  r.set_size = 64;
  r.key_bits = 512;
  r.mode = psi::Mode::kFull;
  r.server_time_s = 0.5;
  r.client_encrypt_time_s = 0.25;
  r.client_decrypt_time_s = 0.125;
  r.bytes_up = 100;
  r.bytes_down = 200;
  r.workers = 2;
  r.ok = true;
  CHECK(csv_row(r, "2026-01-01T00:00:00Z") ==
        "64,512,FULL,0.5,0.25,0.125,100,200,2,2026-01-01T00:00:00Z\n");

  BenchResult bad = r;
  bad.ok = false;
  bad.error = "boom";
  CHECK(csv_row(bad, "t").find("error:boom") != std::string::npos);
}

TEST_CASE("trend summary pairs size and width doublings") {
  std::vector<BenchResult> results;
  auto cell = [](std::uint64_t size, unsigned bits, double t) {
    BenchResult r;
    r.set_size = size;
    r.key_bits = bits;
    r.mode = psi::Mode::kFull;
    r.server_time_s = t;
    r.ok = true;
    return r;
  };
  results.push_back(cell(1024, 512, 0.35));
  results.push_back(cell(2048, 512, 0.70));
  results.push_back(cell(1024, 1024, 1.40));

  TrendSummary trends = summarize_trends(results);
  REQUIRE(trends.per_size_doubling.size() == 1);
  CHECK(trends.per_size_doubling[0].value == doctest::Approx(2.0));
  REQUIRE(trends.per_bits_doubling.size() == 1);
  CHECK(trends.per_bits_doubling[0].value == doctest::Approx(4.0));
}
