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

#include "locpsi/service.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "locpsi/errors.hpp"

namespace locpsi::service {

using nlohmann::json;

namespace {

std::int64_t wall_clock_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

paillier::KeyPair load_keypair(const std::string& dir) {
  auto read_bytes = [](const std::string& path) {
    std::string text = read_text_file(path);
    return std::vector<std::uint8_t>(text.begin(), text.end());
  };
  paillier::KeyPair kp;
  kp.pub = paillier::PublicKey::parse(read_bytes(dir + "/paillier.pub"));
  kp.priv = paillier::PrivateKey::parse(read_bytes(dir + "/paillier.key"));
  if (kp.pub.key_id != kp.priv.key_id)
    throw FormatError("key directory holds a mismatched pair");
  return kp;
}

}  // namespace

std::string role_name(Role role) {
  switch (role) {
    case Role::kQueryServer: return "QUERY_SERVER";
    case Role::kKeyExchange: return "KEY_EXCHANGE";
    case Role::kDecryptServer: return "DECRYPT_SERVER";
  }
  throw Error("unreachable role");
}

Role role_from_name(std::string_view name) {
  if (name == "QUERY_SERVER") return Role::kQueryServer;
  if (name == "KEY_EXCHANGE") return Role::kKeyExchange;
  if (name == "DECRYPT_SERVER") return Role::kDecryptServer;
  throw FormatError("unknown role '" + std::string(name) + "'");
}

Config Config::from_json_file(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::exception& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
  Config c;
  c.listen = j.value("listen", c.listen);
  c.role = role_from_name(j.value("role", role_name(c.role)));
  c.grid_path = j.value("grid", "");
  c.key_bits = j.value("key_bits", c.key_bits);
  c.quota = j.value("quota", c.quota);
  c.window_seconds = j.value("window_seconds", c.window_seconds);
  c.ingest_token = j.value("ingest_token", "");
  c.state_dir = j.value("state_dir", "");
  c.server_key_dir = j.value("server_keys", "");
  c.eval_workers = j.value("eval_workers", c.eval_workers);
  if (j.contains("mode_allowlist")) {
    c.mode_allowlist.clear();
    for (const auto& m : j.at("mode_allowlist"))
      c.mode_allowlist.push_back(psi::mode_from_name(m.get<std::string>()));
  }
  return c;
}

std::string Config::to_json() const {
  json modes = json::array();
  for (psi::Mode m : mode_allowlist) modes.push_back(psi::mode_name(m));
  json j{{"listen", listen},
         {"role", role_name(role)},
         {"grid", grid_path},
         {"key_bits", key_bits},
         {"quota", quota},
         {"window_seconds", window_seconds},
         {"ingest_token", ingest_token},
         {"state_dir", state_dir},
         {"server_keys", server_key_dir},
         {"eval_workers", eval_workers},
         {"mode_allowlist", modes}};
  return j.dump(2);
}

RateLimiter::RateLimiter(unsigned quota, std::int64_t window_seconds)
    : quota_(quota), window_(window_seconds), now_(wall_clock_seconds) {}

bool RateLimiter::try_acquire(const std::string& identity) {
  std::lock_guard lock(mutex_);
  std::int64_t now = now_();
  Entry& e = entries_[identity];
  if (e.count > 0 && now - e.window_start >= window_) {
    e.window_start = now;
    e.count = 0;
  }
  if (e.count == 0) e.window_start = now;
  if (e.count >= quota_) return false;
  ++e.count;
  return true;
}

void RateLimiter::set_clock(std::function<std::int64_t()> now) {
  std::lock_guard lock(mutex_);
  now_ = std::move(now);
}

std::string RateLimiter::serialize() const {
  std::lock_guard lock(mutex_);
  std::ostringstream out;
  for (const auto& [identity, e] : entries_) {
    std::span<const std::uint8_t> id_bytes(
        reinterpret_cast<const std::uint8_t*>(identity.data()), identity.size());
    out << base64_encode(id_bytes) << ' ' << e.window_start << ' ' << e.count
        << '\n';
  }
  return out.str();
}

void RateLimiter::restore(std::string_view text) {
  std::map<std::string, Entry> loaded;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id_b64;
    Entry e;
    if (!(fields >> id_b64 >> e.window_start >> e.count))
      throw FormatError("malformed ledger line: '" + line + "'");
    auto id_bytes = base64_decode(id_b64);
    loaded.emplace(std::string(id_bytes.begin(), id_bytes.end()), e);
  }
  std::lock_guard lock(mutex_);
  entries_ = std::move(loaded);
}

Node::Node(Config config)
    : config_(std::move(config)),
      limiter_(config_.quota, config_.window_seconds),
      entropy_(std::make_unique<SystemEntropy>()) {
  if (config_.role != Role::kKeyExchange) {
    if (config_.grid_path.empty())
      throw RangeError("this role requires a grid spec");
    grid_ = grid::GridSpec::load(config_.grid_path);
    infected_ = grid::TrajectoryBitVector::zeros(*grid_);
  }
  if (config_.role == Role::kDecryptServer) {
    if (config_.server_key_dir.empty())
      throw RangeError("decrypt role requires a server keypair");
    keypair_ = load_keypair(config_.server_key_dir);
  }
  load_state();
}

const grid::GridSpec& Node::grid() const {
  if (!grid_) throw Error("node has no grid");
  return *grid_;
}

const paillier::PublicKey* Node::server_public_key() const {
  return keypair_ ? &keypair_->pub : nullptr;
}

void Node::set_clock(std::function<std::int64_t()> now) {
  limiter_.set_clock(std::move(now));
}

void Node::set_log_sink(std::function<void(const std::string&)> sink) {
  log_sink_ = std::move(sink);
}

void Node::log(const std::string& line) const {
  if (log_sink_) log_sink_(line);
}

std::vector<std::uint8_t> Node::handle_frame(
    std::span<const std::uint8_t> frame) {
  wire::Message request;
  try {
    request = wire::parse(frame);
  } catch (const FormatError& e) {
    log(std::string("reject unparseable message: ") + e.what());
    return wire::serialize(wire::make_error(wire::kErrMalformed, e.what()));
  }
  return wire::serialize(handle(request));
}

wire::Message Node::handle(const wire::Message& request) {
  try {
    return dispatch(request);
  } catch (const FormatError& e) {
    return wire::make_error(wire::kErrMalformed, e.what());
  } catch (const RangeError& e) {
    return wire::make_error(wire::kErrMalformed, e.what());
  } catch (const KeyMismatchError& e) {
    return wire::make_error(wire::kErrKeyMismatch, e.what());
  } catch (const GridMismatchError& e) {
    return wire::make_error(wire::kErrBadGrid, e.what());
  } catch (const std::exception&) {
    // Internal details stay out of replies.
    log("internal error while handling " + wire::type_name(request.type));
    return wire::make_error(wire::kErrInternal, "internal error");
  }
}

wire::Message Node::dispatch(const wire::Message& request) {
  using wire::MessageType;
  bool allowed = false;
  switch (config_.role) {
    case Role::kQueryServer:
      allowed = request.type == MessageType::kQuery ||
                request.type == MessageType::kIngest;
      break;
    case Role::kKeyExchange:
      allowed = request.type == MessageType::kKeysGet ||
                request.type == MessageType::kKeysPut;
      break;
    case Role::kDecryptServer:
      allowed = request.type == MessageType::kDecryptReq ||
                request.type == MessageType::kIngest;
      break;
  }
  if (!allowed) {
    log("reject " + wire::type_name(request.type) + " for role " +
        role_name(config_.role));
    return wire::make_error(wire::kErrWrongRole,
                            role_name(config_.role) + " does not serve " +
                                wire::type_name(request.type));
  }
  switch (request.type) {
    case MessageType::kQuery: return on_query(request.body);
    case MessageType::kIngest: return on_ingest(request.body);
    case MessageType::kKeysPut: return on_keys_put(request.body);
    case MessageType::kKeysGet: return on_keys_get(request.body);
    case MessageType::kDecryptReq: return on_decrypt(request.body);
    default:
      return wire::make_error(wire::kErrMalformed, "unexpected message type");
  }
}

wire::Message Node::on_query(const json& body) {
  psi::EncryptedQuery query = wire::parse_query_body(body);

  bool mode_ok = false;
  for (psi::Mode m : config_.mode_allowlist) mode_ok |= m == query.mode;
  if (!mode_ok)
    return wire::make_error(wire::kErrUnsupported,
                            "mode " + psi::mode_name(query.mode) +
                                " is not enabled on this server");
  if (query.pk.bits != config_.key_bits)
    return wire::make_error(wire::kErrMalformed,
                            "server accepts " + std::to_string(config_.key_bits) +
                                "-bit keys");
  if (query.grid_id != grid_->id())
    return wire::make_error(wire::kErrBadGrid,
                            "query was encoded against a different grid");
  if (query.ciphertexts.size() != grid_->total_cells())
    return wire::make_error(wire::kErrMalformed,
                            "ciphertext count does not match the grid");

  std::string identity = fingerprint_hex(query.pk.key_id);
  if (!limiter_.try_acquire(identity)) {
    log("QUERY key=" + identity + " -> RATE_LIMITED");
    return wire::make_error(wire::kErrRateLimited,
                            "query quota exhausted for this key");
  }
  persist_ledger();

  grid::TrajectoryBitVector snapshot = infected_snapshot();
  psi::PsiResponse response;
  if (query.mode == psi::Mode::kFull) {
    response = psi::server_eval_full(query, snapshot, *entropy_,
                                     config_.eval_workers);
  } else {
    response = psi::server_eval_cardinality(query, snapshot, *entropy_);
  }
  log("QUERY key=" + identity + " mode=" + psi::mode_name(query.mode) +
      " -> RESPONSE");
  return {wire::kVersion, wire::MessageType::kResponse,
          wire::response_body(response, query.pk)};
}

wire::Message Node::on_ingest(const json& body) {
  wire::IngestBody in = wire::parse_ingest_body(body);
  if (config_.ingest_token.empty() || in.token != config_.ingest_token) {
    log("INGEST -> UNAUTHORIZED");
    return wire::make_error(wire::kErrUnauthorized, "bad ingestion token");
  }
  if (in.vector.grid_id != grid_->id())
    return wire::make_error(wire::kErrBadGrid,
                            "vector was encoded against a different grid");
  ingest(in.vector);
  log("INGEST -> OK");
  return {wire::kVersion, wire::MessageType::kIngest, json{{"accepted", true}}};
}

wire::Message Node::on_keys_put(const json& body) {
  paillier::PublicKey pk = wire::parse_keys_put_body(body);
  std::string id = fingerprint_hex(pk.key_id);
  auto canonical = pk.canonical_bytes();
  {
    std::lock_guard lock(registry_mutex_);
    auto it = key_registry_.find(id);
    if (it != key_registry_.end() && it->second != canonical) {
      log("KEYS_PUT key=" + id + " -> CONFLICT");
      return wire::make_error(wire::kErrConflict,
                              "key id already registered with different bytes");
    }
    key_registry_[id] = std::move(canonical);
  }
  log("KEYS_PUT key=" + id + " -> OK");
  return {wire::kVersion, wire::MessageType::kKeysPut, json{{"key_id", id}}};
}

wire::Message Node::on_keys_get(const json& body) {
  Fingerprint key_id = wire::parse_keys_get_body(body);
  std::string id = fingerprint_hex(key_id);
  std::vector<std::uint8_t> canonical;
  {
    std::lock_guard lock(registry_mutex_);
    auto it = key_registry_.find(id);
    if (it == key_registry_.end()) {
      log("KEYS_GET key=" + id + " -> UNKNOWN_KEY");
      return wire::make_error(wire::kErrUnknownKey, "no key registered under " + id);
    }
    canonical = it->second;
  }
  log("KEYS_GET key=" + id + " -> OK");
  paillier::PublicKey pk = paillier::PublicKey::parse(canonical);
  return {wire::kVersion, wire::MessageType::kKeysGet, wire::keys_put_body(pk)};
}

wire::Message Node::on_decrypt(const json& body) {
  wire::DecryptReqBody req = wire::parse_decrypt_req_body(body);
  if (req.client_token.empty())
    return wire::make_error(wire::kErrMalformed, "client token required");
  if (req.key_id != keypair_->pub.key_id)
    return wire::make_error(wire::kErrKeyMismatch,
                            "this server does not hold that key");
  std::size_t limit = grid_ ? grid_->total_cells() : (std::size_t{1} << 16);
  if (req.ciphertexts.size() > limit)
    return wire::make_error(wire::kErrMalformed, "too many ciphertexts");

  std::string identity = "token:" + req.client_token;
  if (!limiter_.try_acquire(identity)) {
    log("DECRYPT_REQ -> RATE_LIMITED");
    return wire::make_error(wire::kErrRateLimited,
                            "decryption quota exhausted for this client");
  }
  persist_ledger();

  std::vector<mpz_class> values;
  values.reserve(req.ciphertexts.size());
  for (const auto& bytes : req.ciphertexts) {
    paillier::Ciphertext c = paillier::Ciphertext::parse(bytes, keypair_->pub);
    values.push_back(paillier::decrypt(keypair_->priv, c));
  }
  log("DECRYPT_REQ count=" + std::to_string(values.size()) + " -> OK");
  return {wire::kVersion, wire::MessageType::kDecryptResp,
          wire::decrypt_resp_body(keypair_->pub, values)};
}

void Node::ingest(const grid::TrajectoryBitVector& v) {
  {
    std::unique_lock lock(vector_mutex_);
    infected_ = grid::merge_or(infected_, v);
  }
  persist_infected();
}

grid::TrajectoryBitVector Node::infected_snapshot() const {
  std::shared_lock lock(vector_mutex_);
  return infected_;
}

std::vector<paillier::Ciphertext> Node::encrypted_infected_snapshot(
    EntropySource& entropy) const {
  if (!keypair_)
    throw Error("only a decrypt-role node can publish an encrypted vector");
  grid::TrajectoryBitVector snapshot = infected_snapshot();
  std::vector<mpz_class> messages;
  messages.reserve(snapshot.bits.size());
  for (std::uint8_t b : snapshot.bits) messages.emplace_back(b);
  return paillier::batch_encrypt_fast(keypair_->priv, keypair_->pub, messages,
                                      entropy);
}

void Node::persist_infected() const {
  if (config_.state_dir.empty()) return;
  grid::TrajectoryBitVector snapshot = infected_snapshot();
  snapshot.save(config_.state_dir + "/infected.bits");
}

void Node::persist_ledger() const {
  if (config_.state_dir.empty()) return;
  write_text_file(config_.state_dir + "/ledger.txt", limiter_.serialize());
}

void Node::load_state() {
  if (config_.state_dir.empty()) return;
  std::filesystem::create_directories(config_.state_dir);
  std::string vec_path = config_.state_dir + "/infected.bits";
  if (grid_ && std::filesystem::exists(vec_path)) {
    grid::TrajectoryBitVector loaded = grid::TrajectoryBitVector::load(vec_path);
    if (loaded.grid_id != grid_->id())
      throw GridMismatchError("persisted vector belongs to a different grid");
    infected_ = std::move(loaded);
  }
  std::string ledger_path = config_.state_dir + "/ledger.txt";
  if (std::filesystem::exists(ledger_path))
    limiter_.restore(read_text_file(ledger_path));
}

}  // namespace locpsi::service
