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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locpsi/encoding.hpp"

namespace locpsi::grid {

using GridId = Fingerprint;

struct GpsPoint {
  double lat = 0;        // degrees, [-90, 90]
  double lon = 0;        // degrees, [-180, 180]
  std::int64_t timestamp = 0;  // UTC seconds
};

// A three-dimensional discretization of a landscape: square lat/lon cells of
// `cell_size` degrees crossed with fixed time slots. Cells are ordered
// time-slot first, then row (latitude), then column (longitude), and every
// interval is half-open [low, high): a point sitting exactly on a boundary
// belongs to the higher-indexed cell.
class GridSpec {
 public:
  static GridSpec create(double lat_min, double lat_max, double lon_min,
                         double lon_max, double cell_size,
                         std::int64_t epoch_start,
                         std::int64_t time_interval = 300,
                         std::uint32_t time_slots = 288);

  double lat_min() const { return lat_min_; }
  double lat_max() const { return lat_max_; }
  double lon_min() const { return lon_min_; }
  double lon_max() const { return lon_max_; }
  double cell_size() const { return cell_size_; }
  std::int64_t epoch_start() const { return epoch_start_; }
  std::int64_t time_interval() const { return time_interval_; }
  std::uint32_t time_slots() const { return time_slots_; }
  std::uint32_t spatial_rows() const { return spatial_rows_; }
  std::uint32_t spatial_cols() const { return spatial_cols_; }
  std::uint64_t total_cells() const { return total_cells_; }
  const GridId& id() const { return id_; }

  // Canonical form: "key=value" lines, keys sorted, shortest round-trip
  // decimal numbers. Doubles as the on-disk grid spec format; its hash is
  // the grid id.
  std::string canonical_text() const;
  static GridSpec parse(std::string_view text);

  static GridSpec load(const std::string& path);
  void save(const std::string& path) const;

  // Spatial/temporal extent of one cell, for reporting matches to humans.
  struct CellBox {
    std::uint32_t slot = 0, row = 0, col = 0;
    double lat_low = 0, lat_high = 0, lon_low = 0, lon_high = 0;
    std::int64_t time_low = 0, time_high = 0;
  };
  CellBox cell_box(std::uint64_t index) const;

 private:
  GridSpec() = default;
  double lat_min_ = 0, lat_max_ = 0, lon_min_ = 0, lon_max_ = 0, cell_size_ = 0;
  std::int64_t epoch_start_ = 0, time_interval_ = 0;
  std::uint32_t time_slots_ = 0, spatial_rows_ = 0, spatial_cols_ = 0;
  std::uint64_t total_cells_ = 0;
  GridId id_{};
};

// Indicator vector over a grid's cells: bits[i] = 1 iff cell i was visited.
// Bound to its grid through grid_id so incompatible encodings cannot be
// combined silently.
struct TrajectoryBitVector {
  GridId grid_id{};
  std::vector<std::uint8_t> bits;  // each element 0 or 1

  std::uint64_t popcount() const;

  // grid_id, then u64 big-endian bit count, then the bits packed eight per
  // byte with bit i stored at position i % 8 of byte i / 8.
  std::vector<std::uint8_t> serialize() const;
  static TrajectoryBitVector deserialize(std::span<const std::uint8_t> bytes);

  static TrajectoryBitVector load(const std::string& path);
  void save(const std::string& path) const;

  static TrajectoryBitVector zeros(const GridSpec& spec);
};

// Index of the cell containing p, by floor division along each axis.
// Throws RangeError for points outside the grid's bounds or time window;
// never clamps.
std::uint64_t cell_index(const GridSpec& spec, const GpsPoint& p);

// Bit vector with a 1 at every visited cell. Duplicate visits are idempotent.
TrajectoryBitVector encode_trajectory(const GridSpec& spec,
                                      std::span<const GpsPoint> points);

// Element-wise OR of two vectors from the same grid.
TrajectoryBitVector merge_or(const TrajectoryBitVector& a,
                             const TrajectoryBitVector& b);

}  // namespace locpsi::grid
