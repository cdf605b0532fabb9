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

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "navsynth/geo.hpp"

namespace navsynth::mapgraph {

/// One load-time problem, tied to a file position when known.
struct Diagnostic {
  std::string file;
  int line = 0;  // 1-based; 0 when not tied to a line
  std::string field;
  std::string message;
};

class BundleError : public std::runtime_error {
 public:
  BundleError(const std::string& what, std::vector<Diagnostic> diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

enum class GeometryKind { Point, Polygon };

/// Point, or a closed ring (first vertex repeated last, at least 4 stored).
struct Geometry {
  GeometryKind kind = GeometryKind::Point;
  std::vector<geo::GeoPoint> coords;
};

struct Entity {
  std::string id;
  std::optional<std::string> name;
  std::map<std::string, std::string> tags;
  Geometry geometry;
  geo::GeoPoint centroid{0.0, 0.0};
  double extent_radius_m = 0.0;  // max centroid-to-vertex distance; 0 for points
};

/// External-recognition tiers, most recognizable last so that the natural
/// integer order of the enum is the prominence order.
enum class ProminenceLevel {
  Unranked = 0,
  Shop,
  Amenity,
  Tourism,
  Brand,
  WikiLinked,
};

/// Tag-driven classification: a wikipedia/wikidata tag wins over brand,
/// brand over tourism, then amenity, then shop.
ProminenceLevel prominence(const Entity& e);

std::string to_string(ProminenceLevel level);

struct StreetEdge {
  std::uint32_t u = 0;
  std::uint32_t v = 0;
  std::optional<std::string> street;
  double length_m = 0.0;  // always recomputed from node coordinates
};

class StreetGraph {
 public:
  struct AdjEntry {
    std::uint32_t neighbor;
    std::uint32_t edge;
  };

  std::size_t node_count() const { return node_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::string& node_id(std::uint32_t idx) const { return node_ids_[idx]; }
  const geo::GeoPoint& node_point(std::uint32_t idx) const { return node_points_[idx]; }
  std::optional<std::uint32_t> find_node(const std::string& id) const;

  std::span<const AdjEntry> neighbors(std::uint32_t idx) const {
    return {adjacency_[idx].data(), adjacency_[idx].size()};
  }
  int degree(std::uint32_t idx) const { return static_cast<int>(adjacency_[idx].size()); }

  const std::vector<StreetEdge>& edges() const { return edges_; }
  const StreetEdge& edge(std::uint32_t idx) const { return edges_[idx]; }

  /// Number of connected components (informational; emptiness aside, the
  /// graph is not required to be connected).
  int component_count() const { return component_count_; }

 private:
  friend class BundleLoader;

  std::vector<std::string> node_ids_;  // sorted; index == id rank
  std::vector<geo::GeoPoint> node_points_;
  std::unordered_map<std::string, std::uint32_t> node_lookup_;
  std::vector<StreetEdge> edges_;
  std::vector<std::vector<AdjEntry>> adjacency_;
  int component_count_ = 0;
};

/// Uniform lat/lon grid over a fixed point set. Radius queries return every
/// item within the great-circle radius, sorted by (distance, index).
class SpatialIndex {
 public:
  SpatialIndex() = default;
  explicit SpatialIndex(std::vector<geo::GeoPoint> points, double cell_deg = 0.002);

  struct Hit {
    double distance_m;
    std::uint32_t index;
  };

  std::vector<Hit> query(const geo::GeoPoint& center, double radius_m) const;
  std::size_t size() const { return points_.size(); }

 private:
  std::int64_t cell_key(double lat, double lon) const;

  std::vector<geo::GeoPoint> points_;
  double cell_deg_ = 0.002;
  std::int64_t lon_cells_ = 0;
  std::unordered_map<std::int64_t, std::vector<std::uint32_t>> cells_;
};

struct Route {
  std::vector<std::uint32_t> nodes;     // graph node indices, in travel order
  std::vector<geo::GeoPoint> polyline;  // node coordinates
  double total_length_m = 0.0;
  geo::GeoPoint start_snap{0.0, 0.0};
  geo::GeoPoint end_snap{0.0, 0.0};
};

class RoutingError : public std::runtime_error {
 public:
  enum class Kind { NoSnap, Disconnected };

  RoutingError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Immutable after load; all queries are read-only and thread-safe.
class MapBundle {
 public:
  /// Entities sorted by id; pointers remain valid for the bundle's lifetime.
  const std::vector<Entity>& entities() const { return entities_; }
  const Entity* entity(const std::string& id) const;
  const StreetGraph& graph() const { return graph_; }
  const SpatialIndex& entity_index() const { return entity_index_; }
  const SpatialIndex& node_index() const { return node_index_; }

  /// Edge indices grouped by street name (unnamed edges excluded).
  const std::map<std::string, std::vector<std::uint32_t>>& edges_by_street() const {
    return edges_by_street_;
  }

 private:
  friend class BundleLoader;

  std::vector<Entity> entities_;
  std::unordered_map<std::string, std::uint32_t> entity_lookup_;
  StreetGraph graph_;
  SpatialIndex entity_index_;
  SpatialIndex node_index_;
  std::map<std::string, std::vector<std::uint32_t>> edges_by_street_;
};

/// Parses and validates the two JSON Lines files. All problems are collected
/// and thrown together as a BundleError; diagnostics carry line numbers.
MapBundle load_bundle(const std::string& entities_path, const std::string& streets_path);

using EntityFilter = std::function<bool(const Entity&)>;

/// Entities whose centroid lies within radius_m of p and which pass the
/// filter, ascending by distance, ties broken by entity id.
std::vector<const Entity*> nearest_entities(const MapBundle& bundle, const geo::GeoPoint& p,
                                            double radius_m, const EntityFilter& filter = {});

/// Dijkstra between the graph nodes nearest to a and b. Both endpoints must
/// snap within snap_tolerance_m. Equal-cost choices resolve by node id.
Route shortest_path(const MapBundle& bundle, const geo::GeoPoint& a, const geo::GeoPoint& b,
                    double snap_tolerance_m = 500.0);

struct IntersectionReport {
  int count = 0;
  std::vector<std::uint32_t> nodes;  // interior route nodes of degree >= 3
};

/// Interior route nodes with degree >= 3, in traversal order.
IntersectionReport intersections_on(const MapBundle& bundle, const Route& r);

/// Maximal route segments delimited by intersections: 0 for single-node
/// routes, otherwise intersections + 1.
int blocks_on(const MapBundle& bundle, const Route& r);

/// Index of the graph edge geometrically nearest to p, searched through
/// nodes within search_radius_m. -1 when nothing is in range.
std::int64_t nearest_edge(const MapBundle& bundle, const geo::GeoPoint& p,
                          double search_radius_m);

/// The street block containing an edge: the maximal chain of edges joined
/// through degree-2 nodes, returned as a node index sequence. Both chain
/// ends are intersections (degree >= 3) or dead ends.
std::vector<std::uint32_t> street_block_chain(const MapBundle& bundle, std::uint32_t edge_index);

}  // namespace navsynth::mapgraph
