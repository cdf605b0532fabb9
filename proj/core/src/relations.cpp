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

#include "navsynth/relations.hpp"

#include <algorithm>
#include <vector>

#include "navsynth/polyline.hpp"

namespace navsynth::relations {

using geo::GeoPoint;
using mapgraph::Entity;

std::string CornerLabel::surface() const {
  if (along == across) return geo::surface_word(along);
  // Compass convention puts north/south first: "north-east", never
  // "east-north".
  const auto is_ns = [](geo::CardinalDirection d) {
    return d == geo::CardinalDirection::North || d == geo::CardinalDirection::South;
  };
  const auto is_ew = [](geo::CardinalDirection d) {
    return d == geo::CardinalDirection::East || d == geo::CardinalDirection::West;
  };
  if (is_ns(across) && is_ew(along)) {
    return geo::surface_word(across) + "-" + geo::surface_word(along);
  }
  return geo::surface_word(along) + "-" + geo::surface_word(across);
}

geo::EgocentricSide side_of_point(std::span<const GeoPoint> route, const GeoPoint& p) {
  if (route.size() < 2) {
    throw std::invalid_argument("side classification requires a route with at least two points");
  }
  const auto proj = geo::project_to_polyline(route, p);
  const GeoPoint& seg_a = route[proj.segment];
  const GeoPoint& seg_b = route[proj.segment + 1];
  const geo::Bearing theta_path = geo::bearing(seg_a, seg_b);
  try {
    const geo::Bearing theta_landmark = geo::bearing(proj.point, p);
    return geo::egocentric_side(theta_path, theta_landmark);
  } catch (const geo::UndefinedBearingError&) {
    // The point sits on the path itself: dead ahead classifies as Right.
    return geo::EgocentricSide::Right;
  }
}

namespace {

/// Landmark entities that anchor per-landmark relations: near
/// representatives, every main pivot, and the beyond landmark.
std::vector<const Entity*> relation_anchors(const sampler::LandmarkSet& landmarks) {
  std::vector<const Entity*> out;
  for (const auto& lm : landmarks.near) out.push_back(lm.representative());
  for (const Entity* e : landmarks.main_pivots) out.push_back(e);
  if (landmarks.beyond) out.push_back(landmarks.beyond);
  return out;
}

}  // namespace

SpatialFeatures compute_features(const mapgraph::MapBundle& bundle,
                                 const sampler::PathSample& sample,
                                 const sampler::LandmarkSet& landmarks) {
  const auto& route = sample.route;
  if (route.nodes.size() < 2 || route.total_length_m <= 0.0) {
    throw DegenerateRouteError("route has no extent (" + std::to_string(route.nodes.size()) +
                               " node(s), " + std::to_string(route.total_length_m) + " m)");
  }

  SpatialFeatures f;
  const GeoPoint goal = sample.goal->centroid;
  f.cardinal_start_to_goal = geo::cardinal_of(geo::bearing(sample.start->centroid, goal));

  for (const Entity* e : relation_anchors(landmarks)) {
    try {
      f.cardinal_to_goal[e->id] = geo::cardinal_of(geo::bearing(e->centroid, goal));
    } catch (const geo::UndefinedBearingError&) {
      // Landmark centered exactly on the goal: no cardinal relation.
    }
    try {
      f.ego_side[e->id] = side_of_point(route.polyline, e->centroid);
    } catch (const geo::UndefinedBearingError&) {
      // Degenerate path segment; leave the side undefined.
    }
  }

  const auto intersections = mapgraph::intersections_on(bundle, route);
  f.n_intersections = intersections.count;
  f.n_blocks = mapgraph::blocks_on(bundle, route);

  // The goal's own street block: the chain of edges through degree-2 nodes
  // containing the edge nearest the goal, oriented by the direction of
  // travel at the route end. Falls back to the route itself when the goal
  // snaps nowhere.
  std::vector<GeoPoint> block;
  {
    const auto edge_idx = mapgraph::nearest_edge(bundle, goal, 300.0);
    if (edge_idx >= 0) {
      const auto chain =
          mapgraph::street_block_chain(bundle, static_cast<std::uint32_t>(edge_idx));
      for (const auto node : chain) block.push_back(bundle.graph().node_point(node));
    } else {
      block = route.polyline;
    }
  }
  const geo::Bearing travel =
      geo::bearing(route.polyline[route.polyline.size() - 2], route.polyline.back());
  {
    // Orient the chain with the travel direction at the goal's segment.
    const auto proj = geo::project_to_polyline(block, goal);
    double seg_deg;
    try {
      seg_deg = geo::bearing(block[proj.segment], block[proj.segment + 1]).degrees();
    } catch (const geo::UndefinedBearingError&) {
      seg_deg = travel.degrees();
    }
    double diff = std::fmod(std::fabs(seg_deg - travel.degrees()), 360.0);
    if (diff > 180.0) diff = 360.0 - diff;
    if (diff > 90.0) std::reverse(block.begin(), block.end());
  }

  const double block_len = geo::polyline_length_m(block);
  const auto proj = geo::project_to_polyline(block, goal);
  const double fraction = block_len > 0.0 ? proj.arc_m / block_len : 0.0;

  if (fraction < 1.0 / 3.0) {
    f.block_position_ego = BlockPositionEgo::NearCorner;
  } else if (fraction > 2.0 / 3.0) {
    f.block_position_ego = BlockPositionEgo::FarCorner;
  } else {
    f.block_position_ego = BlockPositionEgo::Middle;
  }

  if (f.block_position_ego != BlockPositionEgo::Middle) {
    const bool near_corner = f.block_position_ego == BlockPositionEgo::NearCorner;
    CornerLabel label;
    // Along-street component: the block's own bearing at the goal, pointed
    // toward the nearer corner.
    geo::Bearing along_block = travel;
    try {
      along_block = geo::bearing(block[proj.segment], block[proj.segment + 1]);
    } catch (const geo::UndefinedBearingError&) {
    }
    if (near_corner) along_block = geo::Bearing(along_block.degrees() + 180.0);
    label.along = geo::cardinal_of(along_block);
    try {
      label.across = geo::cardinal_of(geo::bearing(proj.point, goal));
    } catch (const geo::UndefinedBearingError&) {
      // Goal sits exactly on the street line: emit a single cardinal.
      label.across = label.along;
    }
    f.block_position_allo = label;
  }
  return f;
}

std::string to_string(BlockPositionEgo p) {
  switch (p) {
    case BlockPositionEgo::Middle: return "middle";
    case BlockPositionEgo::NearCorner: return "near-corner";
    case BlockPositionEgo::FarCorner: return "far-corner";
  }
  return "middle";
}

std::string surface_phrase(BlockPositionEgo p) {
  switch (p) {
    case BlockPositionEgo::Middle: return "in the middle of the block";
    case BlockPositionEgo::NearCorner: return "at the near corner of the block";
    case BlockPositionEgo::FarCorner: return "at the far corner of the block";
  }
  return "in the middle of the block";
}

std::string surface_phrase(const std::optional<CornerLabel>& corner) {
  if (!corner) return "in the middle of the block";
  return "on the " + corner->surface() + " corner of the block";
}

}  // namespace navsynth::relations
