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

// Independent geodesy references for oracle tests. These deliberately use a
// different algebraic route than the library: distances run through ECEF
// chords, bearings through a tangent-plane basis, both in long double.

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace navsynth::testsupport {

inline constexpr long double oracle_earth_radius_m = 6'371'000.0L;
inline constexpr long double oracle_pi = 3.141592653589793238462643383279502884L;

struct Vec3 {
  long double x, y, z;
};

inline Vec3 unit_vector(long double lat_deg, long double lon_deg) {
  const long double lat = lat_deg * oracle_pi / 180.0L;
  const long double lon = lon_deg * oracle_pi / 180.0L;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

/// Great-circle distance via the chord between ECEF unit vectors.
inline long double oracle_distance_m(long double lat1, long double lon1, long double lat2,
                                     long double lon2) {
  const Vec3 a = unit_vector(lat1, lon1);
  const Vec3 b = unit_vector(lat2, lon2);
  const long double dx = a.x - b.x;
  const long double dy = a.y - b.y;
  const long double dz = a.z - b.z;
  const long double chord = std::sqrt(dx * dx + dy * dy + dz * dz);
  const long double angle = 2.0L * std::asin(std::min(1.0L, chord / 2.0L));
  return oracle_earth_radius_m * angle;
}

/// Initial azimuth measured in the tangent plane at the first point: the
/// direction toward the second point is decomposed onto the local east and
/// north basis vectors.
inline long double oracle_bearing_deg(long double lat1, long double lon1, long double lat2,
                                      long double lon2) {
  const Vec3 p1 = unit_vector(lat1, lon1);
  const Vec3 p2 = unit_vector(lat2, lon2);
  const long double lat = lat1 * oracle_pi / 180.0L;
  const long double lon = lon1 * oracle_pi / 180.0L;
  const Vec3 east = {-std::sin(lon), std::cos(lon), 0.0L};
  const Vec3 north = {-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon),
                      std::cos(lat)};
  const long double dot = p1.x * p2.x + p1.y * p2.y + p1.z * p2.z;
  const Vec3 dir = {p2.x - dot * p1.x, p2.y - dot * p1.y, p2.z - dot * p1.z};
  const long double e = dir.x * east.x + dir.y * east.y + dir.z * east.z;
  const long double n = dir.x * north.x + dir.y * north.y + dir.z * north.z;
  long double deg = std::atan2(e, n) * 180.0L / oracle_pi;
  if (deg < 0.0L) deg += 360.0L;
  if (deg >= 360.0L) deg -= 360.0L;
  return deg;
}

/// Absolute angular difference on the circle, in degrees.
inline long double angle_diff_deg(long double a, long double b) {
  long double d = std::fmod(std::fabs(a - b), 360.0L);
  if (d > 180.0L) d = 360.0L - d;
  return d;
}

struct OracleEdge {
  std::uint32_t u, v;
  double w;
};

/// Bellman-Ford single-source distances over an undirected graph.
inline std::vector<double> bellman_ford(std::size_t node_count,
                                        const std::vector<OracleEdge>& edges, std::uint32_t src) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(node_count, inf);
  dist[src] = 0.0;
  for (std::size_t pass = 0; pass + 1 < node_count; ++pass) {
    bool changed = false;
    for (const auto& e : edges) {
      if (dist[e.u] + e.w < dist[e.v]) {
        dist[e.v] = dist[e.u] + e.w;
        changed = true;
      }
      if (dist[e.v] + e.w < dist[e.u]) {
        dist[e.u] = dist[e.v] + e.w;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return dist;
}

}  // namespace navsynth::testsupport
