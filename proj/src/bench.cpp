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

#include "locpsi/bench.hpp"

#include <chrono>
#include <sstream>

#include "locpsi/errors.hpp"
#include "locpsi/wire.hpp"

namespace locpsi::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

grid::TrajectoryBitVector random_vector(std::uint64_t size,
                                        const grid::GridId& id,
                                        EntropySource& entropy) {
  grid::TrajectoryBitVector v;
  v.grid_id = id;
  v.bits.resize(static_cast<std::size_t>(size));
  std::size_t i = 0;
  while (i < v.bits.size()) {
    std::uint64_t word = entropy.u64();
    for (int b = 0; b < 64 && i < v.bits.size(); ++b, ++i)
      v.bits[i] = (word >> b) & 1;
  }
  return v;
}

grid::GridId synthetic_grid_id(std::uint64_t size) {
  std::string tag = "bench-" + std::to_string(size);
  return fingerprint64(std::span(
      reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size()));
}

}  // namespace

const paillier::KeyPair& KeyCache::get(unsigned bits, EntropySource& entropy) {
  auto it = keys_.find(bits);
  if (it == keys_.end()) {
    paillier::KeygenOptions opts;
    opts.allow_insecure = bits < 256;
    it = keys_.emplace(bits, paillier::keygen(bits, entropy, opts)).first;
  }
  return it->second;
}

BenchResult run_cell(std::uint64_t set_size, unsigned key_bits, psi::Mode mode,
                     KeyCache& keys, EntropySource& entropy, unsigned workers) {
  BenchResult r;
  r.set_size = set_size;
  r.key_bits = key_bits;
  r.mode = mode;
  r.workers = workers;
  try {
    const paillier::KeyPair& kp = keys.get(key_bits, entropy);
    grid::GridId gid = synthetic_grid_id(set_size);
    grid::TrajectoryBitVector client_bits = random_vector(set_size, gid, entropy);
    grid::TrajectoryBitVector server_bits = random_vector(set_size, gid, entropy);

    auto t = Clock::now();
    psi::EncryptedQuery query =
        psi::client_prepare_query(kp.pub, kp.priv, client_bits, mode, entropy);
    r.client_encrypt_time_s = seconds_since(t);
    r.bytes_up = wire::frame_size(
        {wire::kVersion, wire::MessageType::kQuery, wire::query_body(query)});

    psi::PsiResponse response;
    t = Clock::now();
    if (mode == psi::Mode::kFull) {
      response = psi::server_eval_full(query, server_bits, entropy, workers);
    } else {
      response = psi::server_eval_cardinality(query, server_bits, entropy);
    }
    r.server_time_s = seconds_since(t);
    r.bytes_down = wire::frame_size({wire::kVersion,
                                     wire::MessageType::kResponse,
                                     wire::response_body(response, kp.pub)});

    // Plaintext answer, computed directly; a wrong protocol result
    // invalidates the cell.
    if (mode == psi::Mode::kFull) {
      t = Clock::now();
      grid::TrajectoryBitVector decoded = psi::client_decode_full(kp.priv, response);
      r.client_decrypt_time_s = seconds_since(t);
      bool match = decoded.bits.size() == client_bits.bits.size();
      for (std::size_t i = 0; match && i < decoded.bits.size(); ++i)
        match = decoded.bits[i] == (client_bits.bits[i] & server_bits.bits[i]);
      if (!match) throw ProtocolViolationError("decoded vector disagrees with plaintext AND");
    } else {
      t = Clock::now();
      std::uint64_t count =
          psi::client_decode_cardinality(kp.priv, response, set_size);
      r.client_decrypt_time_s = seconds_since(t);
      std::uint64_t expected = 0;
      for (std::size_t i = 0; i < client_bits.bits.size(); ++i)
        expected += client_bits.bits[i] & server_bits.bits[i];
      if (count != expected)
        throw ProtocolViolationError("decoded count disagrees with plaintext popcount");
    }
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
  }
  return r;
}

std::string csv_header() {
  return "set_size,key_bits,mode,server_time_s,client_encrypt_time_s,"
         "client_decrypt_time_s,bytes_up,bytes_down,worker_count,timestamp\n";
}

std::string csv_row(const BenchResult& r, const std::string& timestamp) {
  std::ostringstream out;
  if (r.ok) {
    out << r.set_size << ',' << r.key_bits << ',' << psi::mode_name(r.mode)
        << ',' << r.server_time_s << ',' << r.client_encrypt_time_s << ','
        << r.client_decrypt_time_s << ',' << r.bytes_up << ',' << r.bytes_down
        << ',' << r.workers << ',' << timestamp << '\n';
  } else {
    out << r.set_size << ',' << r.key_bits << ',' << psi::mode_name(r.mode)
        << ",error:" << r.error << ",,,,," << r.workers << ',' << timestamp
        << '\n';
  }
  return out.str();
}

namespace {

std::uint64_t parse_size_token(const std::string& token) {
  try {
    if (token.rfind("2^", 0) == 0) {
      int exp = std::stoi(token.substr(2));
      if (exp < 0 || exp > 30) throw RangeError("size exponent out of range");
      return std::uint64_t{1} << exp;
    }
    return std::stoull(token);
  } catch (const std::exception&) {
    throw FormatError("invalid size '" + token + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(sep, pos);
    if (next == std::string::npos) next = s.size();
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

}  // namespace

std::vector<std::uint64_t> parse_size_list(const std::string& spec) {
  std::vector<std::uint64_t> sizes;
  for (const std::string& token : split(spec, ',')) {
    if (token.empty()) continue;
    std::size_t range = token.find("..");
    if (range != std::string::npos) {
      std::uint64_t low = parse_size_token(token.substr(0, range));
      std::uint64_t high = parse_size_token(token.substr(range + 2));
      if (low == 0 || low > high) throw FormatError("bad size range '" + token + "'");
      for (std::uint64_t s = low; s <= high; s *= 2) sizes.push_back(s);
    } else {
      sizes.push_back(parse_size_token(token));
    }
  }
  if (sizes.empty()) throw FormatError("no sizes given");
  return sizes;
}

std::vector<unsigned> parse_bits_list(const std::string& spec) {
  std::vector<unsigned> bits;
  for (const std::string& token : split(spec, ',')) {
    if (token.empty()) continue;
    try {
      bits.push_back(static_cast<unsigned>(std::stoul(token)));
    } catch (const std::exception&) {
      throw FormatError("invalid key width '" + token + "'");
    }
  }
  if (bits.empty()) throw FormatError("no key widths given");
  return bits;
}

TrendSummary summarize_trends(const std::vector<BenchResult>& results) {
  TrendSummary summary;
  auto find = [&](std::uint64_t size, unsigned bits,
                  psi::Mode mode) -> const BenchResult* {
    for (const auto& r : results)
      if (r.ok && r.set_size == size && r.key_bits == bits && r.mode == mode)
        return &r;
    return nullptr;
  };
  for (const auto& r : results) {
    if (!r.ok) continue;
    if (const BenchResult* half = find(r.set_size / 2, r.key_bits, r.mode);
        half && half->server_time_s > 0) {
      std::ostringstream label;
      label << psi::mode_name(r.mode) << " " << r.key_bits << "-bit, "
            << half->set_size << "->" << r.set_size;
      summary.per_size_doubling.push_back(
          {label.str(), r.server_time_s / half->server_time_s});
    }
    if (const BenchResult* narrow = find(r.set_size, r.key_bits / 2, r.mode);
        narrow && narrow->server_time_s > 0) {
      std::ostringstream label;
      label << psi::mode_name(r.mode) << " size " << r.set_size << ", "
            << narrow->key_bits << "->" << r.key_bits << " bits";
      summary.per_bits_doubling.push_back(
          {label.str(), r.server_time_s / narrow->server_time_s});
    }
  }
  return summary;
}

}  // namespace locpsi::bench
