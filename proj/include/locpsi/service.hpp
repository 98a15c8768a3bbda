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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "locpsi/entropy.hpp"
#include "locpsi/grid.hpp"
#include "locpsi/paillier.hpp"
#include "locpsi/psi.hpp"
#include "locpsi/wire.hpp"

namespace locpsi::service {

// What this node is allowed to answer. A query server evaluates encrypted
// intersections against its infected vector; a key-exchange node is a pure
// public-key directory holding no trajectories or ciphertexts; a decrypt
// server supports the on-device variant, holding the keypair that published
// vectors were encrypted under.
enum class Role {
  kQueryServer,
  kKeyExchange,
  kDecryptServer,
};

std::string role_name(Role role);
Role role_from_name(std::string_view name);

struct Config {
  std::string listen = "127.0.0.1:0";
  Role role = Role::kQueryServer;
  std::string grid_path;       // query/decrypt roles
  unsigned key_bits = 1024;    // client key width accepted by queries
  unsigned quota = 1;          // operations per identity per window
  std::int64_t window_seconds = 24 * 60 * 60;
  std::string ingest_token;    // empty disables ingestion
  std::string state_dir;       // empty disables persistence
  std::vector<psi::Mode> mode_allowlist = {psi::Mode::kFull,
                                           psi::Mode::kCardinality};
  std::string server_key_dir;  // decrypt role: directory with the keypair
  unsigned eval_workers = 1;

  static Config from_json_file(const std::string& path);
  std::string to_json() const;
};

// Fixed-window counter per identity. check-and-increment is atomic; with
// quota q no interleaving of concurrent calls can admit more than q in one
// window.
class RateLimiter {
 public:
  RateLimiter(unsigned quota, std::int64_t window_seconds);

  bool try_acquire(const std::string& identity);

  void set_clock(std::function<std::int64_t()> now);

  // Ledger text format: one "base64(identity) window_start count" line per
  // identity.
  std::string serialize() const;
  void restore(std::string_view text);

 private:
  struct Entry {
    std::int64_t window_start = 0;
    unsigned count = 0;
  };
  unsigned quota_;
  std::int64_t window_;
  std::function<std::int64_t()> now_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> entries_;
};

// One server node: state plus message handlers. Transport-independent; wrap
// handle_frame() in a net::Server to put it on a socket. Handlers are safe
// to call concurrently.
class Node {
 public:
  explicit Node(Config config);

  // Parses, dispatches and serializes; never throws, all failures become
  // ERROR messages.
  std::vector<std::uint8_t> handle_frame(std::span<const std::uint8_t> frame);
  wire::Message handle(const wire::Message& request);

  // Trusted-path ingestion (token already checked at the message layer).
  void ingest(const grid::TrajectoryBitVector& v);
  grid::TrajectoryBitVector infected_snapshot() const;

  // The infected vector encrypted element-wise under this node's own key,
  // for out-of-band publication to on-device clients (decrypt role only).
  std::vector<paillier::Ciphertext> encrypted_infected_snapshot(
      EntropySource& entropy) const;

  const Config& config() const { return config_; }
  const grid::GridSpec& grid() const;
  const paillier::PublicKey* server_public_key() const;

  // Test hooks.
  void set_clock(std::function<std::int64_t()> now);
  void set_log_sink(std::function<void(const std::string&)> sink);

 private:
  wire::Message dispatch(const wire::Message& request);
  wire::Message on_query(const nlohmann::json& body);
  wire::Message on_ingest(const nlohmann::json& body);
  wire::Message on_keys_put(const nlohmann::json& body);
  wire::Message on_keys_get(const nlohmann::json& body);
  wire::Message on_decrypt(const nlohmann::json& body);
  void log(const std::string& line) const;
  void persist_infected() const;
  void persist_ledger() const;
  void load_state();

  Config config_;
  std::optional<grid::GridSpec> grid_;
  std::optional<paillier::KeyPair> keypair_;

  mutable std::shared_mutex vector_mutex_;
  grid::TrajectoryBitVector infected_;

  RateLimiter limiter_;

  mutable std::mutex registry_mutex_;
  std::map<std::string, std::vector<std::uint8_t>> key_registry_;

  std::unique_ptr<EntropySource> entropy_;
  std::function<void(const std::string&)> log_sink_;
};

}  // namespace locpsi::service
