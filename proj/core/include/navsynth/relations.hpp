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

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "navsynth/geo.hpp"
#include "navsynth/sampler.hpp"

namespace navsynth::relations {

/// Goal position within its block, in travel order: near the corner where
/// the block is entered, in the middle, or near the far corner.
enum class BlockPositionEgo { Middle, NearCorner, FarCorner };

/// Allocentric corner label: the cardinal toward the nearer block end
/// combined with the cardinal of the across-street offset from the street
/// to the goal. Renders as "north-east"; a single word when both agree.
struct CornerLabel {
  geo::CardinalDirection along;
  geo::CardinalDirection across;

  std::string surface() const;
};

struct SpatialFeatures {
  geo::CardinalDirection cardinal_start_to_goal = geo::CardinalDirection::North;
  // Keyed by landmark entity id (a group's first member stands for it).
  std::map<std::string, geo::CardinalDirection> cardinal_to_goal;
  std::map<std::string, geo::EgocentricSide> ego_side;
  int n_intersections = 0;
  int n_blocks = 0;
  BlockPositionEgo block_position_ego = BlockPositionEgo::Middle;
  std::optional<CornerLabel> block_position_allo;  // engaged iff not Middle
};

class DegenerateRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Side of a point relative to a directed polyline: the path bearing is
/// taken from the segment nearest the point (ties to the earlier segment),
/// the landmark bearing from the nearest path point toward the landmark.
/// A point exactly on the line counts as dead ahead, i.e. Right.
geo::EgocentricSide side_of_point(std::span<const geo::GeoPoint> route, const geo::GeoPoint& p);

/// All spatial relations for one sampled scenario. Throws
/// DegenerateRouteError when the route has fewer than two nodes or zero
/// length.
SpatialFeatures compute_features(const mapgraph::MapBundle& bundle,
                                 const sampler::PathSample& sample,
                                 const sampler::LandmarkSet& landmarks);

std::string to_string(BlockPositionEgo p);

/// "in the middle of the block" / "at the near corner of the block" / ...
std::string surface_phrase(BlockPositionEgo p);
/// "in the middle of the block" / "on the north-east corner of the block".
std::string surface_phrase(const std::optional<CornerLabel>& corner);

}  // namespace navsynth::relations
