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

#include "locpsi/grid.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "locpsi/errors.hpp"

namespace locpsi::grid {

namespace {

constexpr std::uint64_t kMaxTotalCells = std::uint64_t{1} << 31;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("failed to format number");
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError("invalid decimal number: '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw FormatError("invalid integer: '" + std::string(s) + "'");
  return v;
}

std::uint32_t axis_cells(double low, double high, double step) {
  double count = std::ceil((high - low) / step);
  if (!(count >= 1) || count > static_cast<double>(kMaxTotalCells))
    throw RangeError("grid axis produces no cells or too many");
  return static_cast<std::uint32_t>(count);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return data;
}

void write_file(const std::string& path, std::span<const std::uint8_t> data) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot rename " + tmp + " to " + path);
}

}  // namespace

GridSpec GridSpec::create(double lat_min, double lat_max, double lon_min,
                          double lon_max, double cell_size,
                          std::int64_t epoch_start, std::int64_t time_interval,
                          std::uint32_t time_slots) {
  if (!std::isfinite(lat_min) || !std::isfinite(lat_max) ||
      !std::isfinite(lon_min) || !std::isfinite(lon_max) ||
      !std::isfinite(cell_size))
    throw RangeError("grid bounds must be finite");
  if (!(lat_min < lat_max) || !(lon_min < lon_max))
    throw RangeError("grid bounds must satisfy min < max");
  if (!(cell_size > 0)) throw RangeError("cell_size must be positive");
  if (time_interval <= 0) throw RangeError("time_interval must be positive");
  if (time_slots == 0) throw RangeError("time_slots must be positive");

  GridSpec g;
  g.lat_min_ = lat_min;
  g.lat_max_ = lat_max;
  g.lon_min_ = lon_min;
  g.lon_max_ = lon_max;
  g.cell_size_ = cell_size;
  g.epoch_start_ = epoch_start;
  g.time_interval_ = time_interval;
  g.time_slots_ = time_slots;
  g.spatial_rows_ = axis_cells(lat_min, lat_max, cell_size);
  g.spatial_cols_ = axis_cells(lon_min, lon_max, cell_size);
  std::uint64_t spatial =
      std::uint64_t{g.spatial_rows_} * std::uint64_t{g.spatial_cols_};
  if (spatial > kMaxTotalCells / time_slots)
    throw RangeError("grid has too many cells");
  g.total_cells_ = spatial * time_slots;
  std::string canon = g.canonical_text();
  g.id_ = fingerprint64(std::span(
      reinterpret_cast<const std::uint8_t*>(canon.data()), canon.size()));
  return g;
}

std::string GridSpec::canonical_text() const {
  std::ostringstream out;
  out << "cell_size=" << format_double(cell_size_) << '\n'
      << "epoch_start=" << epoch_start_ << '\n'
      << "lat_max=" << format_double(lat_max_) << '\n'
      << "lat_min=" << format_double(lat_min_) << '\n'
      << "lon_max=" << format_double(lon_max_) << '\n'
      << "lon_min=" << format_double(lon_min_) << '\n'
      << "time_interval=" << time_interval_ << '\n'
      << "time_slots=" << time_slots_ << '\n';
  return out.str();
}

GridSpec GridSpec::parse(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("grid spec line missing '=': '" + std::string(line) + "'");
    kv.emplace(std::string(line.substr(0, eq)), std::string(line.substr(eq + 1)));
  }
  auto want = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end())
      throw FormatError(std::string("grid spec missing key '") + key + "'");
    return it->second;
  };
  if (kv.size() != 8) throw FormatError("grid spec must have exactly 8 keys");
  std::int64_t slots = parse_int(want("time_slots"));
  if (slots <= 0 || slots > 0xffffffffLL)
    throw FormatError("time_slots out of range");
  return create(parse_double(want("lat_min")), parse_double(want("lat_max")),
                parse_double(want("lon_min")), parse_double(want("lon_max")),
                parse_double(want("cell_size")), parse_int(want("epoch_start")),
                parse_int(want("time_interval")),
                static_cast<std::uint32_t>(slots));
}

GridSpec GridSpec::load(const std::string& path) {
  auto data = read_file(path);
  return parse(std::string_view(reinterpret_cast<const char*>(data.data()),
                                data.size()));
}

void GridSpec::save(const std::string& path) const {
  std::string text = canonical_text();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                             text.size()));
}

GridSpec::CellBox GridSpec::cell_box(std::uint64_t index) const {
  if (index >= total_cells_) throw RangeError("cell index out of range");
  std::uint64_t spatial = std::uint64_t{spatial_rows_} * spatial_cols_;
  CellBox box;
  box.slot = static_cast<std::uint32_t>(index / spatial);
  std::uint64_t rem = index % spatial;
  box.row = static_cast<std::uint32_t>(rem / spatial_cols_);
  box.col = static_cast<std::uint32_t>(rem % spatial_cols_);
  box.lat_low = lat_min_ + box.row * cell_size_;
  box.lat_high = std::min(lat_min_ + (box.row + 1) * cell_size_, lat_max_);
  box.lon_low = lon_min_ + box.col * cell_size_;
  box.lon_high = std::min(lon_min_ + (box.col + 1) * cell_size_, lon_max_);
  box.time_low = epoch_start_ + box.slot * time_interval_;
  box.time_high = box.time_low + time_interval_;
  return box;
}

std::uint64_t cell_index(const GridSpec& spec, const GpsPoint& p) {
  if (p.lat < -90 || p.lat > 90 || p.lon < -180 || p.lon > 180)
    throw RangeError("GPS coordinates outside valid degree ranges");
  if (!(p.lat >= spec.lat_min() && p.lat < spec.lat_max()))
    throw RangeError("latitude outside grid bounds");
  if (!(p.lon >= spec.lon_min() && p.lon < spec.lon_max()))
    throw RangeError("longitude outside grid bounds");
  std::int64_t dt = p.timestamp - spec.epoch_start();
  std::int64_t window =
      static_cast<std::int64_t>(spec.time_slots()) * spec.time_interval();
  if (dt < 0 || dt >= window)
    throw RangeError("timestamp outside grid time window");

  auto axis_floor = [&](double v, double low, std::uint32_t count) {
    double idx = std::floor((v - low) / spec.cell_size());
    if (idx < 0) return std::uint32_t{0};
    // Guards the floating-point corner where a value just below the upper
    // bound divides to exactly `count`.
    if (idx >= count) return count - 1;
    return static_cast<std::uint32_t>(idx);
  };
  std::uint32_t row = axis_floor(p.lat, spec.lat_min(), spec.spatial_rows());
  std::uint32_t col = axis_floor(p.lon, spec.lon_min(), spec.spatial_cols());
  std::uint32_t slot = static_cast<std::uint32_t>(dt / spec.time_interval());

  return (std::uint64_t{slot} * spec.spatial_rows() + row) *
             spec.spatial_cols() +
         col;
}

TrajectoryBitVector encode_trajectory(const GridSpec& spec,
                                      std::span<const GpsPoint> points) {
  TrajectoryBitVector v = TrajectoryBitVector::zeros(spec);
  for (std::size_t i = 0; i < points.size(); ++i) {
    try {
      v.bits[cell_index(spec, points[i])] = 1;
    } catch (const RangeError& e) {
      throw RangeError("point #" + std::to_string(i) + ": " + e.what());
    }
  }
  return v;
}

TrajectoryBitVector merge_or(const TrajectoryBitVector& a,
                             const TrajectoryBitVector& b) {
  if (a.grid_id != b.grid_id)
    throw GridMismatchError("cannot merge vectors from different grids");
  if (a.bits.size() != b.bits.size())
    throw GridMismatchError("cannot merge vectors of different lengths");
  TrajectoryBitVector out = a;
  for (std::size_t i = 0; i < out.bits.size(); ++i)
    out.bits[i] = out.bits[i] | b.bits[i];
  return out;
}

std::uint64_t TrajectoryBitVector::popcount() const {
  std::uint64_t n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

std::vector<std::uint8_t> TrajectoryBitVector::serialize() const {
  std::vector<std::uint8_t> out(grid_id.begin(), grid_id.end());
  put_u64_be(out, bits.size());
  std::size_t packed = (bits.size() + 7) / 8;
  std::size_t base = out.size();
  out.resize(base + packed, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[base + i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  return out;
}

TrajectoryBitVector TrajectoryBitVector::deserialize(
    std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kHeader = 8 + 8;
  if (bytes.size() < kHeader) throw FormatError("bit vector too short");
  TrajectoryBitVector v;
  std::copy_n(bytes.begin(), v.grid_id.size(), v.grid_id.begin());
  std::uint64_t count = read_u64_be(bytes.subspan(8));
  std::size_t packed = static_cast<std::size_t>((count + 7) / 8);
  if (bytes.size() != kHeader + packed)
    throw FormatError("bit vector length does not match header");
  v.bits.resize(static_cast<std::size_t>(count));
  for (std::uint64_t i = 0; i < count; ++i)
    v.bits[i] = (bytes[kHeader + i / 8] >> (i % 8)) & 1;
  if (count % 8 != 0) {
    std::uint8_t tail = bytes[kHeader + packed - 1];
    if ((tail >> (count % 8)) != 0)
      throw FormatError("bit vector has nonzero padding bits");
  }
  return v;
}

TrajectoryBitVector TrajectoryBitVector::load(const std::string& path) {
  return deserialize(read_file(path));
}

void TrajectoryBitVector::save(const std::string& path) const {
  auto data = serialize();
  write_file(path, data);
}

TrajectoryBitVector TrajectoryBitVector::zeros(const GridSpec& spec) {
  TrajectoryBitVector v;
  v.grid_id = spec.id();
  v.bits.assign(static_cast<std::size_t>(spec.total_cells()), 0);
  return v;
}

}  // namespace locpsi::grid
