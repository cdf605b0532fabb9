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
#include <vector>

#include "navsynth/geo.hpp"
#include "navsynth/mapgraph.hpp"

namespace navsynth::metrics {

/// One gold/predicted coordinate pair.
struct EvalPair {
  geo::GeoPoint gold;
  geo::GeoPoint pred;
};

struct MetricsConfig {
  double epsilon = 1e-5;            // additive constant inside the log
  double h_max_m = 20'037'000.0;    // normalizer: roughly the largest
                                    // achievable haversine distance
};

struct MetricsReport {
  std::map<double, double> accuracy_pct;  // radius (m) -> percent of errors <= radius
  double mae_m = 0.0;
  double medae_m = 0.0;   // ascending order statistic at index floor(n/2)
  double maxae_m = 0.0;
  std::optional<double> auc;  // absent for fewer than two pairs
  std::size_t count = 0;

  double acc100() const { return accuracy_pct.at(100.0); }
  double acc250() const { return accuracy_pct.at(250.0); }
};

inline const std::vector<double> default_radii = {100.0, 250.0};

/// Error-distance metrics over precomputed errors in meters:
///   MAE: mean; Med.AE: sorted errors at 0-based index floor(n/2); Max.AE:
///   max; acc@r: 100 * |{e <= r}| / n; AUC: trapezoidal integral of
///   ln(e_i + epsilon) over the ascending sequence, divided by
///   ln(h_max) * (n - 1). AUC is omitted (with the report flagging it) when
///   n < 2. Throws std::invalid_argument on empty input.
MetricsReport evaluate_errors(std::vector<double> errors_m, const MetricsConfig& config = {},
                              const std::vector<double>& radii = default_radii);

/// evaluate_errors over haversine distances between gold and predicted
/// points.
MetricsReport evaluate(const std::vector<EvalPair>& pairs, const MetricsConfig& config = {},
                       const std::vector<double>& radii = default_radii);

struct CdfPoint {
  double distance_m;
  double cumulative_pct;
};

/// Cumulative error distribution sampled at `steps` evenly spaced distances
/// from 0 to max_distance_m inclusive (steps >= 2). Percentages count
/// errors <= the grid distance, so the curve is monotone non-decreasing.
std::vector<CdfPoint> cdf_export(const std::vector<EvalPair>& pairs, double max_distance_m,
                                 int steps);
std::vector<CdfPoint> cdf_export_errors(const std::vector<double>& errors_m,
                                        double max_distance_m, int steps);

struct BaselinePrediction {
  geo::GeoPoint point{0.0, 0.0};
  bool fallback = false;  // true when no entity lies within the search disc
};

/// Non-learning baseline: the centroid of the most prominent entity within
/// 1 km of the start; ties resolve to the nearer entity, then the smaller
/// id. Falls back to the start itself when the disc is empty.
BaselinePrediction landmark_baseline(const mapgraph::MapBundle& bundle,
                                     const geo::GeoPoint& start, double radius_m = 1000.0);

}  // namespace navsynth::metrics
