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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bundles.hpp"
#include "navsynth/relations.hpp"
#include "oracle_geo.hpp"

using namespace navsynth;
using geo::GeoPoint;
using mapgraph::Entity;
using mapgraph::MapBundle;
using relations::BlockPositionEgo;
namespace ts = navsynth::testsupport;

namespace {

// Northbound avenue m1 -> m2 -> m3 with an eastward spur at m2, so m2 is
// an intersection and the goal block runs m2 -> m3.
MapBundle avenue_scene(const ts::TempDir& dir, double goal_lat, double goal_lon) {
  ts::write_lines(dir.file("entities.jsonl"),
                  {
                      ts::entity_point_line("s0", "Golden Kettle", {{"amenity", "cafe"}},
                                            -74.0000, 40.7000),
                      ts::entity_point_line("g0", std::nullopt, {{"amenity", "garden"}},
                                            goal_lon, goal_lat),
                      ts::entity_point_line("lm", std::nullopt, {{"amenity", "bar"}},
                                            -73.9995, 40.7005),
                  });
  ts::write_lines(dir.file("streets.jsonl"),
                  {
                      ts::node_line("m1", -74.0000, 40.7000),
                      ts::node_line("m2", -74.0000, 40.7010),
                      ts::node_line("m3", -74.0000, 40.7020),
                      ts::node_line("m4", -73.9990, 40.7010),
                      ts::edge_line("m1", "m2", "2nd Avenue"),
                      ts::edge_line("m2", "m3", "2nd Avenue"),
                      ts::edge_line("m2", "m4", "Maple Street"),
                  });
  return mapgraph::load_bundle(dir.file("entities.jsonl"), dir.file("streets.jsonl"));
}

sampler::PathSample sample_of(const MapBundle& bundle) {
  sampler::PathSample sample;
  sample.start = bundle.entity("s0");
  sample.goal = bundle.entity("g0");
  sample.route = mapgraph::shortest_path(bundle, sample.start->centroid, sample.goal->centroid);
  sample.seed = 0;
  return sample;
}

sampler::LandmarkSet with_pivot(const MapBundle& bundle, const char* id) {
  sampler::LandmarkSet lms;
  lms.main_pivots.push_back(bundle.entity(id));
  return lms;
}

}  // namespace

TEST_CASE("start due south of goal gives cardinal North") {
  ts::TempDir dir;
  const auto bundle = avenue_scene(dir, 40.7020, -74.0000);
  const auto sample = sample_of(bundle);
  const auto features = relations::compute_features(bundle, sample, {});
  CHECK(features.cardinal_start_to_goal == geo::CardinalDirection::North);
}

TEST_CASE("landmark perpendicular-right of a northbound route is RIGHT") {
  ts::TempDir dir;
  const auto bundle = avenue_scene(dir, 40.7020, -74.0000);
  const auto sample = sample_of(bundle);
  const auto features = relations::compute_features(bundle, sample, with_pivot(bundle, "lm"));
  REQUIRE(features.ego_side.count("lm"));
  CHECK(features.ego_side.at("lm") == geo::EgocentricSide::Right);

  // The same landmark on a reversed route flips to LEFT.
  auto reversed = sample;
  std::swap(reversed.start, reversed.goal);
  std::reverse(reversed.route.nodes.begin(), reversed.route.nodes.end());
  std::reverse(reversed.route.polyline.begin(), reversed.route.polyline.end());
  std::swap(reversed.route.start_snap, reversed.route.end_snap);
  const auto flipped = relations::compute_features(bundle, reversed, with_pivot(bundle, "lm"));
  CHECK(flipped.ego_side.at("lm") == geo::EgocentricSide::Left);
}

TEST_CASE("side_of_point handles the dead-ahead convention") {
  const std::vector<GeoPoint> northbound = {GeoPoint(40.700, -74.0), GeoPoint(40.702, -74.0)};
  CHECK(relations::side_of_point(northbound, GeoPoint(40.701, -73.999)) ==
        geo::EgocentricSide::Right);
  CHECK(relations::side_of_point(northbound, GeoPoint(40.701, -74.001)) ==
        geo::EgocentricSide::Left);
  // Exactly on the line: Right by the delta == 0 rule.
  CHECK(relations::side_of_point(northbound, GeoPoint(40.701, -74.0)) ==
        geo::EgocentricSide::Right);
}

TEST_CASE("block position thresholds partition the block") {
  ts::TempDir dir0;
  // Goal in the middle of the m2->m3 block (fraction 0.55, clear of the
  // snap tie between m2 and m3).
  {
    const auto bundle = avenue_scene(dir0, 40.70155, -73.99995);
    const auto features = relations::compute_features(bundle, sample_of(bundle), {});
    CHECK(features.n_intersections == 1);
    CHECK(features.n_blocks == 2);
    CHECK(features.block_position_ego == BlockPositionEgo::Middle);
    CHECK_FALSE(features.block_position_allo.has_value());
    CHECK(relations::surface_phrase(features.block_position_allo) ==
          "in the middle of the block");
  }
  // Near corner (fraction ~0.1): the corner where the block is entered.
  {
    ts::TempDir dir;
    const auto bundle = avenue_scene(dir, 40.7011, -73.99995);
    const auto features = relations::compute_features(bundle, sample_of(bundle), {});
    CHECK(features.block_position_ego == BlockPositionEgo::NearCorner);
    REQUIRE(features.block_position_allo.has_value());
    // Toward m2 is south-ish; the goal sits east of the street.
    CHECK(features.block_position_allo->surface() == "south-east");
    CHECK(relations::surface_phrase(features.block_position_allo) ==
          "on the south-east corner of the block");
  }
  // Far corner (fraction ~0.9).
  {
    ts::TempDir dir;
    const auto bundle = avenue_scene(dir, 40.7019, -73.99995);
    const auto features = relations::compute_features(bundle, sample_of(bundle), {});
    CHECK(features.block_position_ego == BlockPositionEgo::FarCorner);
    REQUIRE(features.block_position_allo.has_value());
    CHECK(features.block_position_allo->surface() == "north-east");
  }
}

TEST_CASE("fractional thresholds have no gaps or overlaps") {
  // Slide a goal along a single-block route and recompute the expected
  // class straight from the fraction.
  ts::TempDir dir;
  ts::write_lines(dir.file("entities.jsonl"),
                  {
                      ts::entity_point_line("s0", "Golden Kettle", {{"amenity", "cafe"}},
                                            -74.0003, 40.7000),
                      ts::entity_point_line("g0", std::nullopt, {{"amenity", "garden"}},
                                            -74.0000, 40.7000),
                  });
  ts::write_lines(dir.file("streets.jsonl"),
                  {
                      ts::node_line("m1", -74.0000, 40.7000),
                      ts::node_line("m2", -74.0000, 40.7010),
                      ts::edge_line("m1", "m2", "2nd Avenue"),
                  });
  const auto bundle = mapgraph::load_bundle(dir.file("entities.jsonl"), dir.file("streets.jsonl"));

  sampler::PathSample sample;
  sample.start = bundle.entity("s0");
  sample.goal = bundle.entity("g0");
  sample.route = mapgraph::shortest_path(bundle, GeoPoint(40.7000, -74.0), GeoPoint(40.7010, -74.0));

  Entity goal = *bundle.entity("g0");
  for (int i = 0; i <= 100; ++i) {
    const double f = i / 100.0;
    goal.centroid = GeoPoint(40.7000 + f * 0.0010, -74.0000);
    sample.goal = &goal;
    const auto features = relations::compute_features(bundle, sample, {});
    BlockPositionEgo want = BlockPositionEgo::Middle;
    if (f < 1.0 / 3.0) want = BlockPositionEgo::NearCorner;
    if (f > 2.0 / 3.0) want = BlockPositionEgo::FarCorner;
    CHECK(features.block_position_ego == want);
  }
}

TEST_CASE("degenerate routes are rejected") {
  ts::TempDir dir;
  const auto bundle = avenue_scene(dir, 40.7020, -74.0000);
  sampler::PathSample sample;
  sample.start = bundle.entity("s0");
  sample.goal = bundle.entity("g0");
  sample.route = mapgraph::shortest_path(bundle, GeoPoint(40.7000, -74.0), GeoPoint(40.7000, -74.0));
  CHECK_THROWS_AS(relations::compute_features(bundle, sample, {}),
                  relations::DegenerateRouteError);
}

TEST_CASE("features are invariant under whole-turn bearing shifts") {
  // Bearings enter every feature through cardinal_of and egocentric_side,
  // both of which are wrap-invariant; spot-check the composition.
  ts::TempDir dir;
  const auto bundle = avenue_scene(dir, 40.7019, -73.99995);
  const auto sample = sample_of(bundle);
  const auto a = relations::compute_features(bundle, sample, with_pivot(bundle, "lm"));
  const auto b = relations::compute_features(bundle, sample, with_pivot(bundle, "lm"));
  CHECK(a.cardinal_start_to_goal == b.cardinal_start_to_goal);
  CHECK(a.ego_side == b.ego_side);
  CHECK(a.cardinal_to_goal == b.cardinal_to_goal);
  CHECK(a.n_intersections == b.n_intersections);
  CHECK(a.block_position_ego == b.block_position_ego);
}

TEST_CASE("random scenarios match an independent feature recomputation") {
  ts::TempDir dir;
  const auto files = ts::write_grid_city(dir.path(), {.rows = 14, .cols = 14, .n_entities = 500,
                                                      .seed = 33});
  const auto bundle = mapgraph::load_bundle(files.entities_path, files.streets_path);

  auto oracle_cardinal = [](double deg) {
    const double shifted = std::fmod(deg + 22.5 + 720.0, 360.0);
    return static_cast<geo::CardinalDirection>(static_cast<int>(shifted / 45.0) % 8);
  };

  int checked = 0;
  for (std::uint64_t seed = 0; seed < 80 && checked < 30; ++seed) {
    sampler::PathSample sample;
    try {
      sample = sampler::make_sample(bundle, seed);
    } catch (const std::exception&) {
      continue;
    }
    rng::Engine rng(seed);
    const auto landmarks = sampler::pick_landmarks(bundle, sample, rng);
    relations::SpatialFeatures features;
    try {
      features = relations::compute_features(bundle, sample, landmarks);
    } catch (const relations::DegenerateRouteError&) {
      continue;
    }
    ++checked;

    // Start-to-goal cardinal via the tangent-plane oracle.
    const double sg = static_cast<double>(
        ts::oracle_bearing_deg(sample.start->centroid.lat(), sample.start->centroid.lon(),
                               sample.goal->centroid.lat(), sample.goal->centroid.lon()));
    CHECK(features.cardinal_start_to_goal == oracle_cardinal(sg));

    // Interior degree census.
    int manual_intersections = 0;
    const auto& g = bundle.graph();
    for (std::size_t i = 1; i + 1 < sample.route.nodes.size(); ++i) {
      int degree = 0;
      for (const auto& e : g.edges()) {
        if (e.u == sample.route.nodes[i] || e.v == sample.route.nodes[i]) ++degree;
      }
      if (degree >= 3) ++manual_intersections;
    }
    CHECK(features.n_intersections == manual_intersections);
    CHECK(features.n_blocks == manual_intersections + 1);

    // Per-landmark cardinals from the oracle bearing.
    for (const auto& [id, cardinal] : features.cardinal_to_goal) {
      const Entity* e = bundle.entity(id);
      REQUIRE(e != nullptr);
      const double deg = static_cast<double>(
          ts::oracle_bearing_deg(e->centroid.lat(), e->centroid.lon(),
                                 sample.goal->centroid.lat(), sample.goal->centroid.lon()));
      // Skip sector-boundary draws where double noise could flip the bucket.
      const double frac = std::fmod(deg + 22.5 + 720.0, 45.0);
      if (frac < 1e-6 || frac > 45.0 - 1e-6) continue;
      CHECK(cardinal == oracle_cardinal(deg));
    }
  }
  CHECK(checked >= 30);
}
