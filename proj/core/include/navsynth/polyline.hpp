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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>

#include "navsynth/geo.hpp"

namespace navsynth::geo {

/// Nearest point of a polyline to a query point. Segment projection uses a
/// local equirectangular plane, which is accurate at street scale; distances
/// are reported as great circles for consistency with the rest of the code.
struct PolylineProjection {
  std::size_t segment = 0;   // index i of the segment (line[i], line[i+1])
  double t = 0.0;            // clamped parameter along that segment
  GeoPoint point{0.0, 0.0};  // interpolated projection point
  double distance_m = 0.0;   // query-to-projection great-circle distance
  double arc_m = 0.0;        // arc length from line.front() to the projection
};

namespace detail {

inline constexpr double meters_per_deg = earth_radius_m * std::numbers::pi / 180.0;

struct PlanarPoint {
  double x, y;
};

inline PlanarPoint to_plane(const GeoPoint& origin, const GeoPoint& p) {
  const double cos_lat = std::cos(origin.lat() * std::numbers::pi / 180.0);
  return {(p.lon() - origin.lon()) * cos_lat * meters_per_deg,
          (p.lat() - origin.lat()) * meters_per_deg};
}

}  // namespace detail

/// Clamped projection parameter of p onto the segment (a, b) in the local
/// plane anchored at a. Degenerate segments (a == b) project to t = 0.
inline double project_to_segment(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
  const auto pb = detail::to_plane(a, b);
  const auto pp = detail::to_plane(a, p);
  const double len_sq = pb.x * pb.x + pb.y * pb.y;
  if (len_sq < 1e-12) return 0.0;
  const double t = (pp.x * pb.x + pp.y * pb.y) / len_sq;
  return std::clamp(t, 0.0, 1.0);
}

inline GeoPoint interpolate(const GeoPoint& a, const GeoPoint& b, double t) {
  return GeoPoint(a.lat() + t * (b.lat() - a.lat()), a.lon() + t * (b.lon() - a.lon()));
}

/// Distance from p to the nearest point of segment (a, b).
inline double point_to_segment_distance_m(const GeoPoint& a, const GeoPoint& b, const GeoPoint& p) {
  const double t = project_to_segment(a, b, p);
  return haversine_distance(p, interpolate(a, b, t));
}

/// Global nearest point over all segments; equal distances resolve to the
/// earlier segment. The polyline must contain at least one point.
inline PolylineProjection project_to_polyline(std::span<const GeoPoint> line, const GeoPoint& p) {
  if (line.empty()) {
    throw std::invalid_argument("cannot project onto an empty polyline");
  }
  PolylineProjection best;
  best.point = line.front();
  best.distance_m = haversine_distance(p, line.front());
  double arc = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const double seg_len = haversine_distance(line[i], line[i + 1]);
    const double t = project_to_segment(line[i], line[i + 1], p);
    const GeoPoint proj = interpolate(line[i], line[i + 1], t);
    const double d = haversine_distance(p, proj);
    if (d < best.distance_m) {
      best = {i, t, proj, d, arc + t * seg_len};
    }
    arc += seg_len;
  }
  return best;
}

/// Total polyline arc length in meters.
inline double polyline_length_m(std::span<const GeoPoint> line) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    total += haversine_distance(line[i], line[i + 1]);
  }
  return total;
}

}  // namespace navsynth::geo
