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

#include "navsynth/geo.hpp"

#include <cmath>
#include <numbers>

namespace navsynth::geo {

namespace {

constexpr double deg_to_rad = std::numbers::pi / 180.0;
constexpr double rad_to_deg = 180.0 / std::numbers::pi;

double wrap_degrees(double d) {
  d = std::fmod(d, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d = 0.0;  // fmod can land exactly on 360 after the add
  return d;
}

}  // namespace

GeoPoint::GeoPoint(double lat_deg, double lon_deg) : lat_(lat_deg), lon_(lon_deg) {
  if (!(lat_deg >= -90.0 && lat_deg <= 90.0)) {
    throw std::invalid_argument("latitude out of range [-90, 90]: " + std::to_string(lat_deg));
  }
  if (!(lon_deg >= -180.0 && lon_deg <= 180.0)) {
    throw std::invalid_argument("longitude out of range [-180, 180]: " + std::to_string(lon_deg));
  }
}

Bearing::Bearing(double degrees) : degrees_(wrap_degrees(degrees)) {
  if (!std::isfinite(degrees)) {
    throw std::invalid_argument("bearing must be finite");
  }
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double lat1 = a.lat() * deg_to_rad;
  const double lat2 = b.lat() * deg_to_rad;
  const double dlat = (b.lat() - a.lat()) * deg_to_rad;
  const double dlon = (b.lon() - a.lon()) * deg_to_rad;

  const double s_lat = std::sin(dlat / 2.0);
  const double s_lon = std::sin(dlon / 2.0);
  const double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
  const double c = 2.0 * std::atan2(std::sqrt(h), std::sqrt(1.0 - h));
  return earth_radius_m * c;
}

Bearing bearing(const GeoPoint& a, const GeoPoint& b) {
  if (a == b) {
    throw UndefinedBearingError("bearing undefined for coincident points");
  }
  const double lat1 = a.lat() * deg_to_rad;
  const double lat2 = b.lat() * deg_to_rad;
  const double dlon = (b.lon() - a.lon()) * deg_to_rad;

  const double y = std::sin(dlon) * std::cos(lat2);
  const double x = std::cos(lat1) * std::sin(lat2) - std::sin(lat1) * std::cos(lat2) * std::cos(dlon);
  if (std::abs(y) < 1e-15 && std::abs(x) < 1e-15) {
    // Both atan2 arguments vanish only for antipodal inputs.
    throw UndefinedBearingError("bearing undefined for antipodal points");
  }
  return Bearing(std::atan2(y, x) * rad_to_deg);
}

CardinalDirection cardinal_of(Bearing b) {
  const double shifted = wrap_degrees(b.degrees() + 22.5);
  int sector = static_cast<int>(shifted / 45.0);
  if (sector > 7) sector = 7;  // guard against shifted == 360 epsilon
  return static_cast<CardinalDirection>(sector);
}

EgocentricSide egocentric_side(Bearing theta_path, Bearing theta_landmark) {
  const double delta = wrap_degrees(theta_landmark.degrees() - theta_path.degrees());
  return delta < 180.0 ? EgocentricSide::Right : EgocentricSide::Left;
}

std::string to_string(CardinalDirection d) {
  switch (d) {
    case CardinalDirection::North: return "North";
    case CardinalDirection::NorthEast: return "North-East";
    case CardinalDirection::East: return "East";
    case CardinalDirection::SouthEast: return "South-East";
    case CardinalDirection::South: return "South";
    case CardinalDirection::SouthWest: return "South-West";
    case CardinalDirection::West: return "West";
    case CardinalDirection::NorthWest: return "North-West";
  }
  return "North";
}

std::string surface_word(CardinalDirection d) {
  std::string s = to_string(d);
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string to_string(EgocentricSide s) {
  return s == EgocentricSide::Left ? "LEFT" : "RIGHT";
}

std::string surface_word(EgocentricSide s) {
  return s == EgocentricSide::Left ? "left" : "right";
}

}  // namespace navsynth::geo
