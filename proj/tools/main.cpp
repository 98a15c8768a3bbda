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

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <semaphore>
#include <sstream>

#include "locpsi/bench.hpp"
#include "locpsi/client.hpp"
#include "locpsi/errors.hpp"
#include "locpsi/net.hpp"
#include "locpsi/service.hpp"

namespace fs = std::filesystem;
using namespace locpsi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitExposure = 2;

std::vector<std::uint8_t> read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void write_binary(const std::string& path, std::span<const std::uint8_t> data,
                  bool force) {
  if (!force && fs::exists(path))
    throw IoError(path + " exists; pass --force to overwrite");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
}

paillier::KeyPair load_keypair(const std::string& dir) {
  paillier::KeyPair kp;
  kp.pub = paillier::PublicKey::parse(read_binary(dir + "/paillier.pub"));
  kp.priv = paillier::PrivateKey::parse(read_binary(dir + "/paillier.key"));
  if (kp.pub.key_id != kp.priv.key_id)
    throw FormatError(dir + " holds a mismatched key pair");
  return kp;
}

int cmd_keygen(unsigned bits, const std::string& out_dir, bool force,
               bool insecure) {
  SystemEntropy entropy;
  paillier::KeygenOptions opts;
  opts.allow_insecure = insecure;
  paillier::KeyPair kp = paillier::keygen(bits, entropy, opts);
  fs::create_directories(out_dir);
  write_binary(out_dir + "/paillier.pub", kp.pub.canonical_bytes(), force);
  write_binary(out_dir + "/paillier.key", kp.priv.serialize(), force);
  std::cout << "wrote " << bits << "-bit key pair to " << out_dir
            << " (key_id " << fingerprint_hex(kp.pub.key_id) << ")\n";
  return kExitOk;
}

// CSV columns: lat,lon,timestamp with a header line.
std::vector<grid::GpsPoint> parse_gps_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": missing header row");
  {
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(), ::isspace),
                 header.end());
    if (header != "lat,lon,timestamp")
      throw FormatError(path + ":1: header must be 'lat,lon,timestamp'");
  }
  std::vector<grid::GpsPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string lat_s, lon_s, ts_s;
    if (!std::getline(fields, lat_s, ',') || !std::getline(fields, lon_s, ',') ||
        !std::getline(fields, ts_s))
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": expected lat,lon,timestamp");
    try {
      points.push_back(grid::GpsPoint{std::stod(lat_s), std::stod(lon_s),
                                      static_cast<std::int64_t>(std::stoll(ts_s))});
    } catch (const std::exception&) {
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": invalid number in row");
    }
  }
  return points;
}

int cmd_encode(const std::string& grid_path, const std::string& csv_path,
               const std::string& out_path, bool skip_oob, bool force) {
  grid::GridSpec spec = grid::GridSpec::load(grid_path);
  std::vector<grid::GpsPoint> points = parse_gps_csv(csv_path);

  grid::TrajectoryBitVector v = grid::TrajectoryBitVector::zeros(spec);
  std::size_t rejected = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      v.bits[grid::cell_index(spec, points[i])] = 1;
    } catch (const RangeError& e) {
      // CSV row i+2: one header line, rows are 1-based.
      if (!skip_oob)
        throw RangeError(csv_path + ":" + std::to_string(i + 2) + ": " + e.what());
      std::cout << "skipped out-of-bounds row " << i + 2 << ": " << e.what()
                << "\n";
      ++rejected;
    }
  }
  write_binary(out_path, v.serialize(), force);
  std::cout << "encoded " << points.size() - rejected << " points ("
            << rejected << " rejected) into " << out_path << "; popcount "
            << v.popcount() << " of " << spec.total_cells() << " cells\n";
  return kExitOk;
}

int cmd_query(const std::string& server, const std::string& key_dir,
              const std::string& bitvec_path, const std::string& mode_name_arg,
              const std::string& grid_path) {
  psi::Mode mode = mode_name_arg == "full" ? psi::Mode::kFull
                                           : psi::Mode::kCardinality;
  paillier::KeyPair kp = load_keypair(key_dir);
  grid::TrajectoryBitVector bits = grid::TrajectoryBitVector::load(bitvec_path);
  std::optional<grid::GridSpec> spec;
  if (!grid_path.empty()) {
    spec = grid::GridSpec::load(grid_path);
    if (spec->id() != bits.grid_id)
      throw GridMismatchError("bit vector was not encoded against " + grid_path);
  }
  if (mode == psi::Mode::kFull && !spec)
    throw RangeError("--grid is required for full mode reports");

  SystemEntropy entropy;
  psi::EncryptedQuery query =
      psi::client_prepare_query(kp.pub, kp.priv, bits, mode, entropy);
  psi::PsiResponse response = client::run_query(server, query);

  if (mode == psi::Mode::kCardinality) {
    std::uint64_t count =
        psi::client_decode_cardinality(kp.priv, response, bits.bits.size());
    std::cout << "overlap cardinality: " << count << "\n";
    return count == 0 ? kExitOk : kExitExposure;
  }

  grid::TrajectoryBitVector decoded = psi::client_decode_full(kp.priv, response);
  std::uint64_t matches = decoded.popcount();
  std::cout << matches << " match" << (matches == 1 ? "" : "es") << "\n";
  for (std::size_t i = 0; i < decoded.bits.size(); ++i) {
    if (!decoded.bits[i]) continue;
    auto box = spec->cell_box(i);
    std::cout << "cell " << i << ": lat [" << box.lat_low << ", " << box.lat_high
              << ") lon [" << box.lon_low << ", " << box.lon_high
              << ") time slot " << box.slot << " [" << box.time_low << ", "
              << box.time_high << ")\n";
  }
  return matches == 0 ? kExitOk : kExitExposure;
}

int cmd_ingest(const std::string& server, const std::string& token,
               const std::string& bitvec_path) {
  grid::TrajectoryBitVector v = grid::TrajectoryBitVector::load(bitvec_path);
  client::ingest(server, token, v);
  std::cout << "ingested " << bitvec_path << " (popcount " << v.popcount()
            << ")\n";
  return kExitOk;
}

std::atomic<bool> g_shutdown{false};

int cmd_serve(const std::string& config_path) {
  service::Config config = service::Config::from_json_file(config_path);
  service::Node node(config);
  node.set_log_sink([](const std::string& line) {
    std::cerr << line << std::endl;
  });
  net::Server server(config.listen, [&node](std::span<const std::uint8_t> frame) {
    return node.handle_frame(frame);
  });
  server.start();
  std::cout << "listening " << server.address() << " role "
            << service::role_name(config.role) << std::endl;

  static std::binary_semaphore stop_signal{0};
  std::signal(SIGINT, [](int) { stop_signal.release(); });
  std::signal(SIGTERM, [](int) { stop_signal.release(); });
  stop_signal.acquire();
  server.stop();
  return kExitOk;
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

int cmd_bench(const std::string& sizes_spec, const std::string& bits_spec,
              const std::string& mode_spec, const std::string& csv_path,
              unsigned workers, std::uint64_t seed, bool check_trends) {
  std::vector<std::uint64_t> sizes = bench::parse_size_list(sizes_spec);
  std::vector<unsigned> bits = bench::parse_bits_list(bits_spec);
  std::vector<psi::Mode> modes;
  if (mode_spec == "full") modes = {psi::Mode::kFull};
  else if (mode_spec == "card") modes = {psi::Mode::kCardinality};
  else if (mode_spec == "both") modes = {psi::Mode::kFull, psi::Mode::kCardinality};
  else throw FormatError("--mode must be full, card or both");

  std::unique_ptr<EntropySource> entropy;
  if (seed != 0) entropy = std::make_unique<SeededEntropy>(seed);
  else entropy = std::make_unique<SystemEntropy>();

  bench::KeyCache keys;
  std::vector<bench::BenchResult> results;
  std::ostringstream csv;
  csv << bench::csv_header();
  for (unsigned b : bits) {
    for (std::uint64_t size : sizes) {
      for (psi::Mode mode : modes) {
        bench::BenchResult r =
            bench::run_cell(size, b, mode, keys, *entropy, workers);
        std::string row = bench::csv_row(r, utc_timestamp());
        csv << row;
        std::cout << row;
        std::cout.flush();
        results.push_back(std::move(r));
      }
    }
  }
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + csv_path);
    out << csv.str();
  }

  std::cout << "\nupload model per query, both readings of element size M:\n";
  for (std::uint64_t size : sizes) {
    std::cout << "  N=" << size << ": plaintext bits (M=1): " << size
              << "; ciphertext bits (M=2*key_bits):";
    for (unsigned b : bits) std::cout << " " << size * 2 * b << " @" << b;
    std::cout << "\n";
  }

  bench::TrendSummary trends = bench::summarize_trends(results);
  bool trends_ok = true;
  std::cout << "\nserver time ratio per size doubling:\n";
  for (const auto& r : trends.per_size_doubling)
    std::cout << "  " << r.label << ": " << r.value << "\n";
  std::cout << "server time ratio per key-width doubling:\n";
  for (const auto& r : trends.per_bits_doubling)
    std::cout << "  " << r.label << ": " << r.value << "\n";
  if (check_trends) {
    for (const auto& r : trends.per_size_doubling)
      if (r.value < 1.5 || r.value > 3.0) {
        std::cout << "trend outside [1.5, 3.0]: " << r.label << "\n";
        trends_ok = false;
      }
    for (const auto& r : trends.per_bits_doubling)
      if (r.value < 3.0 || r.value > 10.0) {
        std::cout << "trend outside [3, 10]: " << r.label << "\n";
        trends_ok = false;
      }
  }
  for (const auto& r : results)
    if (!r.ok) {
      std::cout << "cell failed: size " << r.set_size << " bits " << r.key_bits
                << ": " << r.error << "\n";
      trends_ok = false;
    }
  return trends_ok ? kExitOk : kExitError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving location intersection toolkit"};
  app.require_subcommand(1);

  auto* keygen = app.add_subcommand("keygen", "Generate a Paillier key pair");
  unsigned kg_bits = 1024;
  std::string kg_out = "keys";
  bool kg_force = false, kg_insecure = false;
  keygen->add_option("--bits", kg_bits, "Modulus width in bits")
      ->capture_default_str();
  keygen->add_option("--out", kg_out, "Output directory")->capture_default_str();
  keygen->add_flag("--force", kg_force, "Overwrite existing key files");
  keygen->add_flag("--insecure", kg_insecure,
                   "Allow toy key widths below 256 bits (tests only)");

  auto* encode = app.add_subcommand("encode", "Encode a GPS CSV as a bit vector");
  std::string en_grid, en_csv, en_out;
  bool en_skip = false, en_force = false;
  encode->add_option("--grid", en_grid, "Grid spec file")->required();
  encode->add_option("--csv", en_csv, "CSV with lat,lon,timestamp header")->required();
  encode->add_option("--out", en_out, "Output bit vector file")->required();
  encode->add_flag("--skip-oob", en_skip, "Skip out-of-bounds points instead of failing");
  encode->add_flag("--force", en_force, "Overwrite the output file");

  auto* query = app.add_subcommand("query", "Query a server for trajectory overlap");
  std::string q_server, q_keys, q_bitvec, q_mode = "full", q_grid;
  query->add_option("--server", q_server, "Server host:port")->required();
  query->add_option("--keys", q_keys, "Key directory")->required();
  query->add_option("--bitvec", q_bitvec, "Trajectory bit vector file")->required();
  query->add_option("--mode", q_mode, "full or card")
      ->check(CLI::IsMember({"full", "card"}))
      ->capture_default_str();
  query->add_option("--grid", q_grid, "Grid spec for reporting matched cells");

  auto* ingest = app.add_subcommand("ingest", "Upload an infected trajectory (trusted path)");
  std::string in_server, in_token, in_bitvec;
  ingest->add_option("--server", in_server, "Server host:port")->required();
  ingest->add_option("--token", in_token, "Ingestion bearer token")->required();
  ingest->add_option("--bitvec", in_bitvec, "Trajectory bit vector file")->required();

  auto* serve = app.add_subcommand("serve", "Run a server node");
  std::string sv_config;
  serve->add_option("--config", sv_config, "JSON config file")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Protocol benchmark matrix");
  std::string b_sizes = "2^10..2^14", b_bits = "512,1024", b_mode = "both", b_csv;
  unsigned b_workers = 1;
  std::uint64_t b_seed = 0;
  bool b_check = false;
  bench_cmd->add_option("--sizes", b_sizes, "Vector sizes, e.g. 2^10..2^14 or 64,256")
      ->capture_default_str();
  bench_cmd->add_option("--bits", b_bits, "Key widths, comma separated")
      ->capture_default_str();
  bench_cmd->add_option("--mode", b_mode, "full, card or both")
      ->check(CLI::IsMember({"full", "card", "both"}))
      ->capture_default_str();
  bench_cmd->add_option("--csv", b_csv, "Write results to this CSV file");
  bench_cmd->add_option("--workers", b_workers, "Server evaluation threads")
      ->capture_default_str();
  bench_cmd->add_option("--seed", b_seed, "Deterministic vector seed (0 = system entropy)");
  bench_cmd->add_flag("--check", b_check, "Exit nonzero if scaling trends fall outside expected bands");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*keygen) return cmd_keygen(kg_bits, kg_out, kg_force, kg_insecure);
    if (*encode) return cmd_encode(en_grid, en_csv, en_out, en_skip, en_force);
    if (*query) return cmd_query(q_server, q_keys, q_bitvec, q_mode, q_grid);
    if (*ingest) return cmd_ingest(in_server, in_token, in_bitvec);
    if (*serve) return cmd_serve(sv_config);
    if (*bench_cmd)
      return cmd_bench(b_sizes, b_bits, b_mode, b_csv, b_workers, b_seed, b_check);
  } catch (const RemoteError& e) {
    std::cerr << "server error " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
