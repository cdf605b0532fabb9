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

#include <compare>
#include <stdexcept>
#include <string>

namespace navsynth::geo {

/// Mean Earth radius used for all great-circle distances, in meters.
inline constexpr double earth_radius_m = 6'371'000.0;

/// A WGS84 coordinate. Latitude in [-90, 90], longitude in [-180, 180],
/// both in decimal degrees. Out-of-range values are rejected at construction.
class GeoPoint {
 public:
  GeoPoint(double lat_deg, double lon_deg);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

/// An azimuth measured clockwise from true north, always normalized to
/// [0, 360). Construction from any finite value wraps modulo 360.
class Bearing {
 public:
  explicit Bearing(double degrees);

  double degrees() const { return degrees_; }

  friend bool operator==(const Bearing&, const Bearing&) = default;

 private:
  double degrees_;
};

/// Eight compass sectors, each spanning 45 degrees.
enum class CardinalDirection {
  North,
  NorthEast,
  East,
  SouthEast,
  South,
  SouthWest,
  West,
  NorthWest,
};

/// Side of a landmark relative to the direction of travel.
enum class EgocentricSide { Left, Right };

/// Thrown by bearing() when the direction between two points is undefined
/// (coincident or antipodal inputs).
class UndefinedBearingError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Great-circle distance in meters between two points (haversine form,
/// mean Earth radius). Total: returns 0 for coincident points.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Initial great-circle bearing from a to b:
///   atan2(sin(dlon)*cos(lat_b), cos(lat_a)*sin(lat_b)
///         - sin(lat_a)*cos(lat_b)*cos(dlon))
/// converted to degrees and wrapped to [0, 360).
/// Throws UndefinedBearingError for coincident or antipodal points.
Bearing bearing(const GeoPoint& a, const GeoPoint& b);

/// Buckets a bearing into one of eight 45-degree sectors centered on the
/// compass points. North covers [337.5, 360) and [0, 22.5); a boundary value
/// belongs to the clockwise-later sector, so 22.5 maps to NorthEast.
CardinalDirection cardinal_of(Bearing b);

/// Side classification from the path bearing and the bearing of the shortest
/// line from the path to the landmark: delta = (landmark - path) mod 360,
/// Right iff delta < 180, otherwise Left. Dead ahead (delta == 0) is Right.
EgocentricSide egocentric_side(Bearing theta_path, Bearing theta_landmark);

/// "North-East" style label.
std::string to_string(CardinalDirection d);
/// Lowercase surface form used in generated text, e.g. "north-east".
std::string surface_word(CardinalDirection d);

std::string to_string(EgocentricSide s);
/// Lowercase surface form, "left" or "right".
std::string surface_word(EgocentricSide s);

}  // namespace navsynth::geo
