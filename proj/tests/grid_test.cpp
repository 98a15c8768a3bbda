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

#include "locpsi/errors.hpp"
#include "locpsi/grid.hpp"
#include "support/oracles.hpp"

using namespace locpsi;
using namespace locpsi::grid;

namespace {

GridSpec small_grid() {
  // 5 rows x 10 cols x 4 slots = 200 cells.
  return GridSpec::create(40.0, 40.5, -74.0, -73.0, 0.1, 1700000000, 300, 4);
}

GpsPoint random_point(const GridSpec& g, EntropySource& entropy) {
  auto unit = [&] {
    return static_cast<double>(entropy.u64() >> 11) / 9007199254740992.0;
  };
  GpsPoint p;
  p.lat = g.lat_min() + unit() * (g.lat_max() - g.lat_min());
  p.lon = g.lon_min() + unit() * (g.lon_max() - g.lon_min());
  std::int64_t window = g.time_slots() * g.time_interval();
  p.timestamp = g.epoch_start() +
                static_cast<std::int64_t>(entropy.u64() % window);
  return p;
}

}  // namespace

TEST_CASE("grid dimensions derive from bounds and cell size") {
  GridSpec g = small_grid();
  CHECK(g.spatial_rows() == 5);
  CHECK(g.spatial_cols() == 10);
  CHECK(g.time_slots() == 4);
  CHECK(g.total_cells() == 200);
}

TEST_CASE("grid validation rejects degenerate parameters") {
  CHECK_THROWS_AS(GridSpec::create(40.5, 40.0, -74, -73, 0.1, 0), RangeError);
  CHECK_THROWS_AS(GridSpec::create(40.0, 40.5, -73, -74, 0.1, 0), RangeError);
  CHECK_THROWS_AS(GridSpec::create(40.0, 40.5, -74, -73, 0.0, 0), RangeError);
  CHECK_THROWS_AS(GridSpec::create(40.0, 40.5, -74, -73, 0.1, 0, 0), RangeError);
  CHECK_THROWS_AS(GridSpec::create(40.0, 40.5, -74, -73, 0.1, 0, 300, 0),
                  RangeError);
  CHECK_THROWS_AS(GridSpec::create(-90, 90, -180, 180, 1e-7, 0), RangeError);
}

TEST_CASE("origin point lands in cell 0") {
  GridSpec g = small_grid();
  CHECK(cell_index(g, {g.lat_min(), g.lon_min(), g.epoch_start()}) == 0);
}

TEST_CASE("first cell of the second time slot follows the whole spatial block") {
  GridSpec g = small_grid();
  GpsPoint p{g.lat_min(), g.lon_min(), g.epoch_start() + g.time_interval()};
  CHECK(cell_index(g, p) ==
        std::uint64_t{g.spatial_rows()} * g.spatial_cols());
}

TEST_CASE("boundary points belong to the next cell") {
  GridSpec g = small_grid();
  // 40.1 is exactly the shared edge of rows 0 and 1.
  std::uint64_t idx = cell_index(g, {40.1, -74.0, g.epoch_start()});
  CHECK(idx == g.spatial_cols());
  // Last instant of slot 0 stays in slot 0; first instant of slot 1 moves on.
  CHECK(cell_index(g, {40.0, -74.0, g.epoch_start() + 299}) == 0);
  CHECK(cell_index(g, {40.0, -74.0, g.epoch_start() + 300}) ==
        std::uint64_t{g.spatial_rows()} * g.spatial_cols());
}

TEST_CASE("out-of-bounds points raise range errors, never clamp") {
  GridSpec g = small_grid();
  CHECK_THROWS_AS(cell_index(g, {39.99, -74.0, g.epoch_start()}), RangeError);
  CHECK_THROWS_AS(cell_index(g, {40.5, -74.0, g.epoch_start()}), RangeError);
  CHECK_THROWS_AS(cell_index(g, {40.0, -73.0, g.epoch_start()}), RangeError);
  CHECK_THROWS_AS(cell_index(g, {40.0, -74.0, g.epoch_start() - 1}), RangeError);
  CHECK_THROWS_AS(
      cell_index(g, {40.0, -74.0,
                     g.epoch_start() + g.time_slots() * g.time_interval()}),
      RangeError);
  CHECK_THROWS_AS(cell_index(g, {91.0, -74.0, g.epoch_start()}), RangeError);
}

TEST_CASE("cell_index agrees with the exhaustive containment scan") {
  GridSpec g = small_grid();
  SeededEntropy entropy(31);
  for (int i = 0; i < 1000; ++i) {
    GpsPoint p = random_point(g, entropy);
    auto hits = oracle::cells_containing(g, p);
    REQUIRE(hits.size() == 1);  // half-open cells tile the space
    CHECK(cell_index(g, p) == hits[0]);
  }
}

TEST_CASE("identical inputs always produce identical indices") {
  GridSpec g = small_grid();
  SeededEntropy entropy(32);
  for (int i = 0; i < 100; ++i) {
    GpsPoint p = random_point(g, entropy);
    CHECK(cell_index(g, p) == cell_index(g, p));
  }
}

TEST_CASE("cell_box inverts cell_index") {
  GridSpec g = small_grid();
  SeededEntropy entropy(33);
  for (int i = 0; i < 200; ++i) {
    GpsPoint p = random_point(g, entropy);
    auto box = g.cell_box(cell_index(g, p));
    CHECK(p.lat >= box.lat_low);
    CHECK(p.lat < box.lat_high);
    CHECK(p.lon >= box.lon_low);
    CHECK(p.lon < box.lon_high);
    CHECK(p.timestamp >= box.time_low);
    CHECK(p.timestamp < box.time_high);
  }
}

TEST_CASE("empty trajectory encodes to the zero vector") {
  GridSpec g = small_grid();
  TrajectoryBitVector v = encode_trajectory(g, {});
  CHECK(v.bits.size() == g.total_cells());
  CHECK(v.popcount() == 0);
  CHECK(v.grid_id == g.id());
}

TEST_CASE("single point sets exactly its cell") {
  GridSpec g = small_grid();
  GpsPoint p{40.23, -73.51, 1700000400};
  TrajectoryBitVector v = encode_trajectory(g, std::vector<GpsPoint>{p});
  CHECK(v.popcount() == 1);
  CHECK(v.bits[cell_index(g, p)] == 1);
}

TEST_CASE("encoding is idempotent and bounded by the point count") {
  GridSpec g = small_grid();
  SeededEntropy entropy(34);
  std::vector<GpsPoint> points;
  for (int i = 0; i < 288; ++i) points.push_back(random_point(g, entropy));
  points.push_back(points.front());  // duplicate visit

  TrajectoryBitVector v = encode_trajectory(g, points);
  CHECK(v.popcount() <= points.size());
  for (const GpsPoint& p : points) {
    auto hits = oracle::cells_containing(g, p);
    REQUIRE(hits.size() == 1);
    CHECK(v.bits[hits[0]] == 1);
  }
  std::uint64_t set_bits = v.popcount();
  std::uint64_t confirmed = 0;
  for (std::size_t i = 0; i < v.bits.size(); ++i) {
    if (!v.bits[i]) continue;
    bool claimed = false;
    for (const GpsPoint& p : points) claimed |= oracle::cells_containing(g, p)[0] == i;
    confirmed += claimed;
  }
  CHECK(confirmed == set_bits);
}

TEST_CASE("encode reports the failing point index") {
  GridSpec g = small_grid();
  std::vector<GpsPoint> points{{40.1, -73.5, 1700000000},
                               {39.0, -73.5, 1700000000}};
  try {
    encode_trajectory(g, points);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(std::string(e.what()).find("point #1") != std::string::npos);
  }
}

TEST_CASE("merge_or behaves like set union") {
  GridSpec g = small_grid();
  SeededEntropy entropy(35);
  TrajectoryBitVector zero = TrajectoryBitVector::zeros(g);
  TrajectoryBitVector a = zero, b = zero;
  a.bits = oracle::random_bits(a.bits.size(), entropy);
  b.bits = oracle::random_bits(b.bits.size(), entropy);

  CHECK(merge_or(a, zero).bits == a.bits);  // identity
  CHECK(merge_or(a, a).bits == a.bits);     // idempotence
  CHECK(merge_or(a, b).bits == merge_or(b, a).bits);

  TrajectoryBitVector c = zero;
  c.bits = oracle::random_bits(c.bits.size(), entropy);
  CHECK(merge_or(merge_or(a, b), c).bits == merge_or(a, merge_or(b, c)).bits);

  // |a OR b| = |a| + |b| - |a AND b|
  std::uint64_t and_count = oracle::intersection_count(a.bits, b.bits);
  CHECK(merge_or(a, b).popcount() == a.popcount() + b.popcount() - and_count);
}

TEST_CASE("merge_or rejects vectors from different grids") {
  GridSpec g = small_grid();
  GridSpec h = GridSpec::create(40.0, 40.5, -74.0, -73.0, 0.1, 1700000000, 300, 5);
  CHECK_THROWS_AS(
      merge_or(TrajectoryBitVector::zeros(g), TrajectoryBitVector::zeros(h)),
      GridMismatchError);
}

TEST_CASE("canonical text is stable and drives the grid id") {
  GridSpec g = small_grid();
  GridSpec same = small_grid();
  CHECK(g.canonical_text() == same.canonical_text());
  CHECK(g.id() == same.id());

  GridSpec other = GridSpec::create(40.0, 40.5, -74.0, -73.0, 0.1, 1700000001, 300, 4);
  CHECK(g.id() != other.id());

  GridSpec parsed = GridSpec::parse(g.canonical_text());
  CHECK(parsed.id() == g.id());
  CHECK(parsed.total_cells() == g.total_cells());
}

TEST_CASE("grid spec parse rejects malformed documents") {
  CHECK_THROWS_AS(GridSpec::parse("lat_min=40\n"), FormatError);
  CHECK_THROWS_AS(GridSpec::parse("no equals sign"), FormatError);
  GridSpec g = small_grid();
  std::string text = g.canonical_text();
  CHECK_THROWS_AS(GridSpec::parse(text + "extra=1\n"), FormatError);
}

TEST_CASE("bit vector serialization round-trips") {
  GridSpec g = small_grid();
  SeededEntropy entropy(36);
  TrajectoryBitVector v = TrajectoryBitVector::zeros(g);
  v.bits = oracle::random_bits(v.bits.size(), entropy);

  auto bytes = v.serialize();
  CHECK(bytes.size() == 8 + 8 + (v.bits.size() + 7) / 8);
  TrajectoryBitVector back = TrajectoryBitVector::deserialize(bytes);
  CHECK(back.grid_id == v.grid_id);
  CHECK(back.bits == v.bits);

  // Nonzero padding bits must be rejected (13 bits leaves 3 padding bits).
  TrajectoryBitVector odd;
  odd.grid_id = v.grid_id;
  odd.bits = {1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1};
  auto corrupt = odd.serialize();
  CHECK(TrajectoryBitVector::deserialize(corrupt).bits == odd.bits);
  corrupt.back() |= 0x80;
  CHECK_THROWS_AS(TrajectoryBitVector::deserialize(corrupt), FormatError);

  corrupt = bytes;
  corrupt.pop_back();
  CHECK_THROWS_AS(TrajectoryBitVector::deserialize(corrupt), FormatError);
}

TEST_CASE("grid and vector files round-trip through disk") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "locpsi_grid_test";
  fs::create_directories(dir);

  GridSpec g = small_grid();
  g.save((dir / "grid.spec").string());
  CHECK(GridSpec::load((dir / "grid.spec").string()).id() == g.id());

  SeededEntropy entropy(37);
  TrajectoryBitVector v = TrajectoryBitVector::zeros(g);
  v.bits = oracle::random_bits(v.bits.size(), entropy);
  v.save((dir / "v.bits").string());
  TrajectoryBitVector back = TrajectoryBitVector::load((dir / "v.bits").string());
  CHECK(back.bits == v.bits);
  CHECK(back.grid_id == v.grid_id);
  fs::remove_all(dir);
}
