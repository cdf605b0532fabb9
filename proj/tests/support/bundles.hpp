// Copyright 2026 The navsynth Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic map bundles for tests: JSONL line builders, a scoped temp
// directory, a random scatter bundle, and a deterministic grid city.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "navsynth/mapgraph.hpp"

namespace navsynth::testsupport {

std::string entity_point_line(const std::string& id, const std::optional<std::string>& name,
                              const std::map<std::string, std::string>& tags, double lon,
                              double lat);
std::string entity_polygon_line(const std::string& id, const std::optional<std::string>& name,
                                const std::map<std::string, std::string>& tags,
                                const std::vector<std::pair<double, double>>& lonlat_ring);
std::string node_line(const std::string& id, double lon, double lat);
std::string edge_line(const std::string& u, const std::string& v,
                      const std::optional<std::string>& street,
                      std::optional<double> length = std::nullopt);

void write_lines(const std::string& path, const std::vector<std::string>& lines);

/// Creates a unique directory under the system temp dir; removed on
/// destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& prefix = "navsynth");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

struct GridCityOptions {
  int rows = 30;
  int cols = 30;
  double origin_lat = 40.70;
  double origin_lon = -74.02;
  double spacing_deg = 0.001;  // roughly one short city block
  int n_entities = 2000;
  int n_large_polygons = 5;  // oversized entities, ineligible as goals
  std::uint64_t seed = 20260810;
};

struct BundleFiles {
  std::string entities_path;
  std::string streets_path;
};

/// Deterministic synthetic city: a rectangular street grid with named rows
/// and avenues, and entities scattered alongside edges with OSM-style tags
/// across all prominence tiers.
BundleFiles write_grid_city(const std::string& dir, const GridCityOptions& options = {});

struct ScatterOptions {
  int n_entities = 200;
  double center_lat = 40.7;
  double center_lon = -74.0;
  double half_extent_deg = 0.02;
  std::uint64_t seed = 7;
};

/// Entities uniformly scattered in a box, with a trivial two-node graph so
/// the bundle loads. For spatial-index and baseline oracle tests.
BundleFiles write_scatter(const std::string& dir, const ScatterOptions& options = {});

}  // namespace navsynth::testsupport
