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

#include "navsynth/mapgraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <set>

#include <nlohmann/json.hpp>

#include "navsynth/polyline.hpp"

namespace navsynth::mapgraph {

using json = nlohmann::json;

namespace {

std::vector<std::uint32_t> connected_components(const StreetGraph& g, int* count_out);

}  // namespace

ProminenceLevel prominence(const Entity& e) {
  const auto& tags = e.tags;
  if (tags.count("wikipedia") || tags.count("wikidata")) return ProminenceLevel::WikiLinked;
  if (tags.count("brand")) return ProminenceLevel::Brand;
  if (tags.count("tourism")) return ProminenceLevel::Tourism;
  if (tags.count("amenity")) return ProminenceLevel::Amenity;
  if (tags.count("shop")) return ProminenceLevel::Shop;
  return ProminenceLevel::Unranked;
}

std::string to_string(ProminenceLevel level) {
  switch (level) {
    case ProminenceLevel::WikiLinked: return "wiki-linked";
    case ProminenceLevel::Brand: return "brand";
    case ProminenceLevel::Tourism: return "tourism";
    case ProminenceLevel::Amenity: return "amenity";
    case ProminenceLevel::Shop: return "shop";
    case ProminenceLevel::Unranked: return "unranked";
  }
  return "unranked";
}

std::optional<std::uint32_t> StreetGraph::find_node(const std::string& id) const {
  auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Spatial index

SpatialIndex::SpatialIndex(std::vector<geo::GeoPoint> points, double cell_deg)
    : points_(std::move(points)), cell_deg_(cell_deg) {
  lon_cells_ = static_cast<std::int64_t>(std::ceil(360.0 / cell_deg_));
  for (std::uint32_t i = 0; i < points_.size(); ++i) {
    cells_[cell_key(points_[i].lat(), points_[i].lon())].push_back(i);
  }
}

std::int64_t SpatialIndex::cell_key(double lat, double lon) const {
  const auto row = static_cast<std::int64_t>(std::floor((lat + 90.0) / cell_deg_));
  auto col = static_cast<std::int64_t>(std::floor((lon + 180.0) / cell_deg_));
  col = ((col % lon_cells_) + lon_cells_) % lon_cells_;  // wrap at the antimeridian
  return row * (lon_cells_ + 1) + col;
}

std::vector<SpatialIndex::Hit> SpatialIndex::query(const geo::GeoPoint& center,
                                                   double radius_m) const {
  std::vector<Hit> hits;
  if (points_.empty() || radius_m < 0.0) return hits;

  const double theta = radius_m / geo::earth_radius_m;  // central angle
  const double dlat_deg = theta * (180.0 / std::numbers::pi) * 1.0000001;

  const double lat_lo = std::max(-90.0, center.lat() - dlat_deg);
  const double lat_hi = std::min(90.0, center.lat() + dlat_deg);

  // Longitude span widens with latitude; bound it by the smallest cosine in
  // the latitude band touched by the disc.
  const double band_max_abs_lat = std::min(90.0, std::max(std::abs(lat_lo), std::abs(lat_hi)));
  const double cos_min = std::cos(band_max_abs_lat * std::numbers::pi / 180.0);
  double dlon_deg;
  const double s = std::sin(theta / 2.0);
  if (cos_min <= 1e-9 || s >= cos_min) {
    dlon_deg = 180.0;
  } else {
    dlon_deg = 2.0 * std::asin(s / cos_min) * (180.0 / std::numbers::pi) * 1.0000001;
    dlon_deg = std::min(dlon_deg, 180.0);
  }

  const auto row_lo = static_cast<std::int64_t>(std::floor((lat_lo + 90.0) / cell_deg_));
  const auto row_hi = static_cast<std::int64_t>(std::floor((lat_hi + 90.0) / cell_deg_));
  const auto col_lo = static_cast<std::int64_t>(std::floor((center.lon() - dlon_deg + 180.0) / cell_deg_));
  const auto col_hi = static_cast<std::int64_t>(std::floor((center.lon() + dlon_deg + 180.0) / cell_deg_));

  std::set<std::int64_t> seen_cols;  // dedupe wrapped columns
  for (std::int64_t row = row_lo; row <= row_hi; ++row) {
    seen_cols.clear();
    for (std::int64_t raw_col = col_lo; raw_col <= col_hi; ++raw_col) {
      const std::int64_t col = ((raw_col % lon_cells_) + lon_cells_) % lon_cells_;
      if (!seen_cols.insert(col).second) continue;
      auto it = cells_.find(row * (lon_cells_ + 1) + col);
      if (it == cells_.end()) continue;
      for (std::uint32_t idx : it->second) {
        const double d = geo::haversine_distance(center, points_[idx]);
        if (d <= radius_m) hits.push_back({d, idx});
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.distance_m != b.distance_m) return a.distance_m < b.distance_m;
    return a.index < b.index;
  });
  return hits;
}

// ---------------------------------------------------------------------------
// Bundle loading

class BundleLoader {
 public:
  MapBundle load(const std::string& entities_path, const std::string& streets_path) {
    parse_entities(entities_path);
    parse_streets(streets_path);
    if (!diagnostics_.empty()) {
      throw BundleError("map bundle failed validation (" +
                            std::to_string(diagnostics_.size()) + " problem(s))",
                        std::move(diagnostics_));
    }
    finalize();
    return std::move(bundle_);
  }

 private:
  void fail(const std::string& file, int line, const std::string& field, const std::string& msg) {
    diagnostics_.push_back({file, line, field, msg});
  }

  std::optional<geo::GeoPoint> parse_coord(const json& j, const std::string& file, int line,
                                           const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      fail(file, line, field, "expected [lon, lat] number pair");
      return std::nullopt;
    }
    const double lon = j[0].get<double>();
    const double lat = j[1].get<double>();
    try {
      return geo::GeoPoint(lat, lon);
    } catch (const std::invalid_argument& e) {
      fail(file, line, field, e.what());
      return std::nullopt;
    }
  }

  void parse_entities(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      fail(path, 0, "", "cannot open file");
      return;
    }
    std::string line_text;
    int line = 0;
    while (std::getline(in, line_text)) {
      ++line;
      if (line_text.empty()) continue;
      json j = json::parse(line_text, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        fail(path, line, "", "invalid JSON object");
        continue;
      }
      Entity e;
      if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
        fail(path, line, "id", "missing or empty entity id");
        continue;
      }
      e.id = j["id"].get<std::string>();
      if (j.contains("name") && !j["name"].is_null()) {
        if (!j["name"].is_string()) {
          fail(path, line, "name", "name must be a string or null");
          continue;
        }
        e.name = j["name"].get<std::string>();
      }
      if (j.contains("tags") && !j["tags"].is_null()) {
        if (!j["tags"].is_object()) {
          fail(path, line, "tags", "tags must be an object of string values");
          continue;
        }
        bool ok = true;
        for (auto it = j["tags"].begin(); it != j["tags"].end(); ++it) {
          if (!it.value().is_string()) {
            fail(path, line, "tags." + it.key(), "tag value must be a string");
            ok = false;
            break;
          }
          e.tags[it.key()] = it.value().get<std::string>();
        }
        if (!ok) continue;
      }
      if (!j.contains("geometry") || !j["geometry"].is_object()) {
        fail(path, line, "geometry", "missing geometry object");
        continue;
      }
      const json& g = j["geometry"];
      const std::string type = g.value("type", "");
      if (!g.contains("coords") || !g["coords"].is_array()) {
        fail(path, line, "geometry.coords", "missing coords array");
        continue;
      }
      std::vector<geo::GeoPoint> coords;
      bool coords_ok = true;
      for (const auto& c : g["coords"]) {
        auto p = parse_coord(c, path, line, "geometry.coords");
        if (!p) {
          coords_ok = false;
          break;
        }
        coords.push_back(*p);
      }
      if (!coords_ok) continue;

      if (type == "point") {
        if (coords.size() != 1) {
          fail(path, line, "geometry.coords", "point geometry requires exactly one coordinate");
          continue;
        }
        e.geometry = {GeometryKind::Point, coords};
        e.centroid = coords[0];
        e.extent_radius_m = 0.0;
      } else if (type == "polygon") {
        if (coords.size() < 4) {
          fail(path, line, "geometry.coords",
               "polygon ring requires at least 4 stored vertices (closed ring)");
          continue;
        }
        if (!(coords.front() == coords.back())) {
          fail(path, line, "geometry.coords", "polygon ring is not closed (first != last vertex)");
          continue;
        }
        e.geometry = {GeometryKind::Polygon, coords};
        double lat_sum = 0.0, lon_sum = 0.0;
        const std::size_t distinct = coords.size() - 1;
        for (std::size_t i = 0; i < distinct; ++i) {
          lat_sum += coords[i].lat();
          lon_sum += coords[i].lon();
        }
        e.centroid = geo::GeoPoint(lat_sum / static_cast<double>(distinct),
                                   lon_sum / static_cast<double>(distinct));
        double extent = 0.0;
        for (const auto& c : coords) {
          extent = std::max(extent, geo::haversine_distance(e.centroid, c));
        }
        e.extent_radius_m = extent;
      } else {
        fail(path, line, "geometry.type", "geometry type must be \"point\" or \"polygon\"");
        continue;
      }

      if (entity_lines_.count(e.id)) {
        fail(path, line, "id", "duplicate entity id '" + e.id + "'");
        continue;
      }
      entity_lines_[e.id] = line;
      bundle_.entities_.push_back(std::move(e));
    }
  }

  void parse_streets(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
      fail(path, 0, "", "cannot open file");
      return;
    }
    struct RawEdge {
      std::string u, v;
      std::optional<std::string> street;
      std::optional<double> stored_length;
      int line;
    };
    std::vector<std::pair<std::string, geo::GeoPoint>> raw_nodes;
    std::unordered_map<std::string, int> node_lines;
    std::vector<RawEdge> raw_edges;

    std::string line_text;
    int line = 0;
    while (std::getline(in, line_text)) {
      ++line;
      if (line_text.empty()) continue;
      json j = json::parse(line_text, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        fail(path, line, "", "invalid JSON object");
        continue;
      }
      const std::string type = j.value("type", "");
      if (type == "node") {
        if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty()) {
          fail(path, line, "id", "missing or empty node id");
          continue;
        }
        const std::string id = j["id"].get<std::string>();
        if (!j.contains("coord")) {
          fail(path, line, "coord", "missing node coordinate");
          continue;
        }
        auto p = parse_coord(j["coord"], path, line, "coord");
        if (!p) continue;
        if (node_lines.count(id)) {
          fail(path, line, "id", "duplicate node id '" + id + "'");
          continue;
        }
        node_lines[id] = line;
        raw_nodes.emplace_back(id, *p);
      } else if (type == "edge") {
        RawEdge e;
        e.line = line;
        if (!j.contains("u") || !j["u"].is_string() || !j.contains("v") || !j["v"].is_string()) {
          fail(path, line, "u/v", "edge requires string node ids 'u' and 'v'");
          continue;
        }
        e.u = j["u"].get<std::string>();
        e.v = j["v"].get<std::string>();
        if (j.contains("street") && !j["street"].is_null()) {
          if (!j["street"].is_string()) {
            fail(path, line, "street", "street must be a string or null");
            continue;
          }
          e.street = j["street"].get<std::string>();
        }
        if (j.contains("length") && !j["length"].is_null()) {
          if (!j["length"].is_number()) {
            fail(path, line, "length", "length must be a number");
            continue;
          }
          e.stored_length = j["length"].get<double>();
        }
        raw_edges.push_back(std::move(e));
      } else {
        fail(path, line, "type", "record type must be \"node\" or \"edge\"");
      }
    }

    // Assign indices by sorted node id so equal-cost tie-breaks are id order.
    std::sort(raw_nodes.begin(), raw_nodes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    StreetGraph& g = bundle_.graph_;
    for (std::uint32_t i = 0; i < raw_nodes.size(); ++i) {
      g.node_ids_.push_back(raw_nodes[i].first);
      g.node_points_.push_back(raw_nodes[i].second);
      g.node_lookup_[raw_nodes[i].first] = i;
    }
    g.adjacency_.resize(g.node_ids_.size());

    std::set<std::pair<std::uint32_t, std::uint32_t>> seen_pairs;
    for (const auto& re : raw_edges) {
      auto ui = g.find_node(re.u);
      auto vi = g.find_node(re.v);
      if (!ui) {
        fail(path, re.line, "u", "edge references unknown node '" + re.u + "'");
        continue;
      }
      if (!vi) {
        fail(path, re.line, "v", "edge references unknown node '" + re.v + "'");
        continue;
      }
      if (*ui == *vi) {
        fail(path, re.line, "u/v", "self-loop edge on node '" + re.u + "'");
        continue;
      }
      const auto pair = std::minmax(*ui, *vi);
      if (!seen_pairs.insert({pair.first, pair.second}).second) {
        fail(path, re.line, "u/v", "duplicate edge between '" + re.u + "' and '" + re.v + "'");
        continue;
      }
      const double computed =
          geo::haversine_distance(g.node_point(*ui), g.node_point(*vi));
      if (re.stored_length) {
        const double stored = *re.stored_length;
        const double rel = computed > 0.0 ? std::abs(stored - computed) / computed
                                          : std::abs(stored);
        if (rel > 0.01) {
          fail(path, re.line, "length",
               "stored edge length " + std::to_string(stored) +
                   " disagrees with recomputed " + std::to_string(computed) +
                   " by more than 1%");
          continue;
        }
      }
      StreetEdge edge;
      edge.u = *ui;
      edge.v = *vi;
      edge.street = re.street;
      edge.length_m = computed;
      const auto edge_idx = static_cast<std::uint32_t>(g.edges_.size());
      g.edges_.push_back(edge);
      g.adjacency_[*ui].push_back({*vi, edge_idx});
      g.adjacency_[*vi].push_back({*ui, edge_idx});
    }
    for (auto& adj : g.adjacency_) {
      std::sort(adj.begin(), adj.end(), [](const StreetGraph::AdjEntry& a,
                                           const StreetGraph::AdjEntry& b) {
        if (a.neighbor != b.neighbor) return a.neighbor < b.neighbor;
        return a.edge < b.edge;
      });
    }
  }

  void finalize() {
    auto& entities = bundle_.entities_;
    std::sort(entities.begin(), entities.end(),
              [](const Entity& a, const Entity& b) { return a.id < b.id; });
    std::vector<geo::GeoPoint> centroids;
    centroids.reserve(entities.size());
    for (std::uint32_t i = 0; i < entities.size(); ++i) {
      bundle_.entity_lookup_[entities[i].id] = i;
      centroids.push_back(entities[i].centroid);
    }
    bundle_.entity_index_ = SpatialIndex(std::move(centroids));

    StreetGraph& g = bundle_.graph_;
    bundle_.node_index_ = SpatialIndex(g.node_points_);
    connected_components(g, &g.component_count_);

    for (std::uint32_t i = 0; i < g.edges_.size(); ++i) {
      if (g.edges_[i].street) {
        bundle_.edges_by_street_[*g.edges_[i].street].push_back(i);
      }
    }
  }

  MapBundle bundle_;
  std::vector<Diagnostic> diagnostics_;
  std::unordered_map<std::string, int> entity_lines_;
};

namespace {

std::vector<std::uint32_t> connected_components(const StreetGraph& g, int* count_out) {
  std::vector<std::uint32_t> comp(g.node_count(), std::numeric_limits<std::uint32_t>::max());
  std::uint32_t next = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s = 0; s < g.node_count(); ++s) {
    if (comp[s] != std::numeric_limits<std::uint32_t>::max()) continue;
    stack.push_back(s);
    comp[s] = next;
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (const auto& adj : g.neighbors(u)) {
        if (comp[adj.neighbor] == std::numeric_limits<std::uint32_t>::max()) {
          comp[adj.neighbor] = next;
          stack.push_back(adj.neighbor);
        }
      }
    }
    ++next;
  }
  if (count_out) *count_out = static_cast<int>(next);
  return comp;
}

}  // namespace

MapBundle load_bundle(const std::string& entities_path, const std::string& streets_path) {
  return BundleLoader().load(entities_path, streets_path);
}

const Entity* MapBundle::entity(const std::string& id) const {
  auto it = entity_lookup_.find(id);
  if (it == entity_lookup_.end()) return nullptr;
  return &entities_[it->second];
}

std::vector<const Entity*> nearest_entities(const MapBundle& bundle, const geo::GeoPoint& p,
                                            double radius_m, const EntityFilter& filter) {
  std::vector<const Entity*> out;
  // Hits arrive sorted by (distance, index); index order equals id order
  // because entities are stored sorted by id.
  for (const auto& hit : bundle.entity_index().query(p, radius_m)) {
    const Entity& e = bundle.entities()[hit.index];
    if (filter && !filter(e)) continue;
    out.push_back(&e);
  }
  return out;
}

namespace {

std::uint32_t snap_node(const MapBundle& bundle, const geo::GeoPoint& p, double tolerance_m,
                        const char* which) {
  const auto hits = bundle.node_index().query(p, tolerance_m);
  if (hits.empty()) {
    throw RoutingError(RoutingError::Kind::NoSnap,
                       std::string(which) + " point does not snap to any graph node within " +
                           std::to_string(tolerance_m) + " m");
  }
  return hits.front().index;
}

}  // namespace

Route shortest_path(const MapBundle& bundle, const geo::GeoPoint& a, const geo::GeoPoint& b,
                    double snap_tolerance_m) {
  const StreetGraph& g = bundle.graph();
  if (g.node_count() == 0) {
    throw RoutingError(RoutingError::Kind::NoSnap, "street graph is empty");
  }
  const std::uint32_t src = snap_node(bundle, a, snap_tolerance_m, "start");
  const std::uint32_t dst = snap_node(bundle, b, snap_tolerance_m, "end");

  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.node_count(), inf);
  std::vector<std::uint32_t> parent(g.node_count(), std::numeric_limits<std::uint32_t>::max());
  using QItem = std::pair<double, std::uint32_t>;
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> queue;
  dist[src] = 0.0;
  queue.push({0.0, src});
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    if (u == dst) break;
    for (const auto& adj : g.neighbors(u)) {
      const double nd = d + g.edge(adj.edge).length_m;
      if (nd < dist[adj.neighbor]) {
        dist[adj.neighbor] = nd;
        parent[adj.neighbor] = u;
        queue.push({nd, adj.neighbor});
      } else if (nd == dist[adj.neighbor] && u < parent[adj.neighbor]) {
        parent[adj.neighbor] = u;  // stable choice among equal-cost predecessors
      }
    }
  }
  if (dist[dst] == inf) {
    throw RoutingError(RoutingError::Kind::Disconnected,
                       "no path between snapped nodes '" + g.node_id(src) + "' and '" +
                           g.node_id(dst) + "'");
  }

  Route route;
  for (std::uint32_t at = dst;; at = parent[at]) {
    route.nodes.push_back(at);
    if (at == src) break;
  }
  std::reverse(route.nodes.begin(), route.nodes.end());
  route.polyline.reserve(route.nodes.size());
  for (const auto idx : route.nodes) route.polyline.push_back(g.node_point(idx));
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < route.polyline.size(); ++i) {
    total += geo::haversine_distance(route.polyline[i], route.polyline[i + 1]);
  }
  route.total_length_m = total;
  route.start_snap = g.node_point(src);
  route.end_snap = g.node_point(dst);
  return route;
}

IntersectionReport intersections_on(const MapBundle& bundle, const Route& r) {
  IntersectionReport report;
  const StreetGraph& g = bundle.graph();
  for (std::size_t i = 1; i + 1 < r.nodes.size(); ++i) {
    if (g.degree(r.nodes[i]) >= 3) {
      report.nodes.push_back(r.nodes[i]);
    }
  }
  report.count = static_cast<int>(report.nodes.size());
  return report;
}

int blocks_on(const MapBundle& bundle, const Route& r) {
  if (r.nodes.size() <= 1) return 0;
  return intersections_on(bundle, r).count + 1;
}

std::int64_t nearest_edge(const MapBundle& bundle, const geo::GeoPoint& p,
                          double search_radius_m) {
  const StreetGraph& g = bundle.graph();
  std::set<std::uint32_t> edge_set;
  for (const auto& hit : bundle.node_index().query(p, search_radius_m)) {
    for (const auto& adj : g.neighbors(hit.index)) edge_set.insert(adj.edge);
  }
  std::int64_t best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto idx : edge_set) {
    const auto& e = g.edge(idx);
    const double d =
        geo::point_to_segment_distance_m(g.node_point(e.u), g.node_point(e.v), p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::int64_t>(idx);
    }
  }
  return best;
}

std::vector<std::uint32_t> street_block_chain(const MapBundle& bundle, std::uint32_t edge_index) {
  const StreetGraph& g = bundle.graph();
  const StreetEdge& seed = g.edge(edge_index);
  std::vector<std::uint32_t> chain = {seed.u, seed.v};
  std::set<std::uint32_t> used_edges = {edge_index};

  // Grow the chain through degree-2 nodes at either end; loops terminate
  // via the used-edge set.
  auto grow = [&](bool at_front) {
    for (;;) {
      const std::uint32_t end = at_front ? chain.front() : chain.back();
      if (g.degree(end) != 2) return;
      const StreetGraph::AdjEntry* next = nullptr;
      for (const auto& adj : g.neighbors(end)) {
        if (!used_edges.count(adj.edge)) {
          next = &adj;
          break;
        }
      }
      if (!next) return;
      used_edges.insert(next->edge);
      if (at_front) {
        chain.insert(chain.begin(), next->neighbor);
      } else {
        chain.push_back(next->neighbor);
      }
    }
  };
  grow(false);
  grow(true);
  return chain;
}

}  // namespace navsynth::mapgraph
