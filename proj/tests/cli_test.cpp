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

#include <filesystem>
#include <fstream>

#include "locpsi/grid.hpp"
#include "locpsi/paillier.hpp"
#include "support/oracles.hpp"
#include "support/proc.hpp"

using namespace locpsi;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("locpsi_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
}

grid::GridSpec demo_grid() {
  return grid::GridSpec::create(40.0, 40.1, -74.0, -73.9, 0.01, 1700000000, 300, 4);
}

}  // namespace

TEST_CASE("keygen writes loadable keys and honors --force") {
  TempDir dir("keygen");
  auto first = proc::run_cli({"keygen", "--bits", "512", "--out", dir.file("keys")});
  CHECK(first.exit_code == 0);

  auto pub_bytes = [&] {
    std::ifstream in(dir.file("keys/paillier.pub"), std::ios::binary);
    return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
  };
  paillier::PublicKey pk = paillier::PublicKey::parse(pub_bytes());
  CHECK(pk.bits == 512);

  auto clobber = proc::run_cli({"keygen", "--bits", "512", "--out", dir.file("keys")});
  CHECK(clobber.exit_code == 1);
  CHECK(clobber.output.find("--force") != std::string::npos);

  auto forced = proc::run_cli(
      {"keygen", "--bits", "512", "--out", dir.file("keys"), "--force"});
  CHECK(forced.exit_code == 0);
  CHECK(paillier::PublicKey::parse(pub_bytes()).bits == 512);

  auto weak = proc::run_cli({"keygen", "--bits", "128", "--out", dir.file("weak")});
  CHECK(weak.exit_code == 1);
  auto toy = proc::run_cli(
      {"keygen", "--bits", "128", "--out", dir.file("weak"), "--insecure"});
  CHECK(toy.exit_code == 0);
}

TEST_CASE("keygen defaults to 1024-bit keys") {
  TempDir dir("keygen_default");
  auto result = proc::run_cli({"keygen", "--out", dir.file("keys")});
  CHECK(result.exit_code == 0);
  CHECK(result.output.find("1024-bit") != std::string::npos);
  std::ifstream in(dir.file("keys/paillier.pub"), std::ios::binary);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  CHECK(paillier::PublicKey::parse(bytes).bits == 1024);
}

TEST_CASE("encode handles empty, single-row, bad and out-of-bounds input") {
  TempDir dir("encode");
  demo_grid().save(dir.file("grid.spec"));

  write_text(dir.file("empty.csv"), "lat,lon,timestamp\n");
  auto empty = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                              dir.file("empty.csv"), "--out", dir.file("empty.bits")});
  CHECK(empty.exit_code == 0);
  CHECK(grid::TrajectoryBitVector::load(dir.file("empty.bits")).popcount() == 0);

  write_text(dir.file("one.csv"), "lat,lon,timestamp\n40.055,-73.955,1700000600\n");
  auto one = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                            dir.file("one.csv"), "--out", dir.file("one.bits")});
  CHECK(one.exit_code == 0);
  grid::TrajectoryBitVector v = grid::TrajectoryBitVector::load(dir.file("one.bits"));
  CHECK(v.popcount() == 1);
  grid::GridSpec g = demo_grid();
  CHECK(v.bits[grid::cell_index(g, {40.055, -73.955, 1700000600})] == 1);

  write_text(dir.file("bad.csv"), "lat,lon,timestamp\n40.05,-73.95\n");
  auto bad = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                            dir.file("bad.csv"), "--out", dir.file("bad.bits")});
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find(":2") != std::string::npos);  // line number reported

  write_text(dir.file("noheader.csv"), "40.05,-73.95,1700000600\n");
  auto noheader = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                                 dir.file("noheader.csv"), "--out", dir.file("x.bits")});
  CHECK(noheader.exit_code == 1);

  write_text(dir.file("oob.csv"),
             "lat,lon,timestamp\n40.05,-73.95,1700000600\n55.0,-73.95,1700000600\n");
  auto oob = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                            dir.file("oob.csv"), "--out", dir.file("oob.bits")});
  CHECK(oob.exit_code == 1);
  CHECK(oob.output.find(":3") != std::string::npos);

  auto skipped = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                                dir.file("oob.csv"), "--out", dir.file("oob.bits"),
                                "--skip-oob"});
  CHECK(skipped.exit_code == 0);
  CHECK(skipped.output.find("row 3") != std::string::npos);
  CHECK(grid::TrajectoryBitVector::load(dir.file("oob.bits")).popcount() == 1);
}

TEST_CASE("encode of random points matches the containment oracle") {
  TempDir dir("encode_rand");
  grid::GridSpec g = demo_grid();
  g.save(dir.file("grid.spec"));
  SeededEntropy entropy(121);

  std::string csv = "lat,lon,timestamp\n";
  std::vector<grid::GpsPoint> points;
  for (int i = 0; i < 50; ++i) {
    auto unit = [&] {
      return static_cast<double>(entropy.u64() >> 11) / 9007199254740992.0;
    };
    grid::GpsPoint p;
    p.lat = 40.0 + unit() * 0.1;
    p.lon = -74.0 + unit() * 0.1;
    p.timestamp = 1700000000 + static_cast<std::int64_t>(entropy.u64() % 1200);
    points.push_back(p);
    char row[128];
    std::snprintf(row, sizeof row, "%.10f,%.10f,%lld\n", p.lat, p.lon,
                  static_cast<long long>(p.timestamp));
    csv += row;
  }
  write_text(dir.file("rand.csv"), csv);

  auto encoded = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                                dir.file("rand.csv"), "--out", dir.file("rand.bits")});
  REQUIRE(encoded.exit_code == 0);
  grid::TrajectoryBitVector v = grid::TrajectoryBitVector::load(dir.file("rand.bits"));

  std::vector<std::uint8_t> expected(g.total_cells(), 0);
  for (const auto& p : points) {
    auto hits = oracle::cells_containing(g, p);
    REQUIRE(hits.size() == 1);
    expected[hits[0]] = 1;
  }
  CHECK(v.bits == expected);
}

TEST_CASE("query against a live server reports overlap and rate limits") {
  TempDir dir("query");
  grid::GridSpec g = demo_grid();
  g.save(dir.file("grid.spec"));

  auto kg = proc::run_cli({"keygen", "--bits", "512", "--out", dir.file("keys")});
  REQUIRE(kg.exit_code == 0);

  write_text(dir.file("mine.csv"),
             "lat,lon,timestamp\n40.011,-73.983,1700000100\n40.055,-73.921,1700000400\n");
  write_text(dir.file("infected.csv"),
             "lat,lon,timestamp\n40.011,-73.983,1700000100\n40.091,-73.913,1700000900\n");
  write_text(dir.file("clean.csv"),
             "lat,lon,timestamp\n40.033,-73.966,1700000700\n");
  for (const char* name : {"mine", "infected", "clean"}) {
    auto enc = proc::run_cli({"encode", "--grid", dir.file("grid.spec"), "--csv",
                              dir.file(std::string(name) + ".csv"), "--out",
                              dir.file(std::string(name) + ".bits")});
    REQUIRE(enc.exit_code == 0);
  }

  write_text(dir.file("server.json"),
             std::string("{\n") + "  \"listen\": \"127.0.0.1:0\",\n" +
                 "  \"role\": \"QUERY_SERVER\",\n" + "  \"grid\": \"" +
                 dir.file("grid.spec") + "\",\n" + "  \"key_bits\": 512,\n" +
                 "  \"quota\": 2,\n" + "  \"window_seconds\": 86400,\n" +
                 "  \"ingest_token\": \"tok\"\n}\n");
  proc::SpawnedServer server(dir.file("server.json"));

  auto ingest = proc::run_cli(
      {"ingest", "--server", server.address(), "--token", "tok", "--bitvec",
       dir.file("infected.bits")});
  REQUIRE(ingest.exit_code == 0);

  auto full = proc::run_cli({"query", "--server", server.address(), "--keys",
                             dir.file("keys"), "--bitvec", dir.file("mine.bits"),
                             "--mode", "full", "--grid", dir.file("grid.spec")});
  CHECK(full.exit_code == 2);  // exposure found
  CHECK(full.output.find("1 match") != std::string::npos);
  std::uint64_t overlap_cell =
      grid::cell_index(g, {40.011, -73.983, 1700000100});
  CHECK(full.output.find("cell " + std::to_string(overlap_cell)) !=
        std::string::npos);

  auto card = proc::run_cli({"query", "--server", server.address(), "--keys",
                             dir.file("keys"), "--bitvec", dir.file("clean.bits"),
                             "--mode", "card"});
  CHECK(card.exit_code == 0);  // no exposure
  CHECK(card.output.find("overlap cardinality: 0") != std::string::npos);

  // Quota 2 is spent; the third query must surface RATE_LIMITED verbatim.
  auto limited = proc::run_cli({"query", "--server", server.address(), "--keys",
                                dir.file("keys"), "--bitvec", dir.file("mine.bits"),
                                "--mode", "card"});
  CHECK(limited.exit_code == 1);
  CHECK(limited.output.find("RATE_LIMITED") != std::string::npos);
}

TEST_CASE("bench writes the CSV and verifies cells against the oracle") {
  TempDir dir("bench");
  auto bench = proc::run_cli({"bench", "--sizes", "2^4,2^5", "--bits", "512",
                              "--mode", "both", "--csv", dir.file("out.csv"),
                              "--seed", "7"});
  CHECK(bench.exit_code == 0);

  std::ifstream in(dir.file("out.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "set_size,key_bits,mode,server_time_s,client_encrypt_time_s,"
        "client_decrypt_time_s,bytes_up,bytes_down,worker_count,timestamp");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);  // 2 sizes x 1 width x 2 modes
  CHECK(bench.output.find("ratio per size doubling") != std::string::npos);
}
