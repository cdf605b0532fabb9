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

#include "navsynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace navsynth::metrics {

MetricsReport evaluate_errors(std::vector<double> errors_m, const MetricsConfig& config,
                              const std::vector<double>& radii) {
  if (errors_m.empty()) {
    throw std::invalid_argument("cannot evaluate an empty set of pairs");
  }
  std::sort(errors_m.begin(), errors_m.end());
  const std::size_t n = errors_m.size();

  MetricsReport report;
  report.count = n;

  double sum = 0.0;
  for (const double e : errors_m) sum += e;
  report.mae_m = sum / static_cast<double>(n);
  report.medae_m = errors_m[n / 2];
  report.maxae_m = errors_m.back();

  for (const double r : radii) {
    const auto within = std::upper_bound(errors_m.begin(), errors_m.end(), r) - errors_m.begin();
    report.accuracy_pct[r] = 100.0 * static_cast<double>(within) / static_cast<double>(n);
  }

  if (n >= 2) {
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      integral += (std::log(errors_m[i] + config.epsilon) +
                   std::log(errors_m[i + 1] + config.epsilon)) /
                  2.0;
    }
    report.auc = integral / (std::log(config.h_max_m) * static_cast<double>(n - 1));
  }
  return report;
}

MetricsReport evaluate(const std::vector<EvalPair>& pairs, const MetricsConfig& config,
                       const std::vector<double>& radii) {
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& pair : pairs) {
    errors.push_back(geo::haversine_distance(pair.gold, pair.pred));
  }
  return evaluate_errors(std::move(errors), config, radii);
}

std::vector<CdfPoint> cdf_export_errors(const std::vector<double>& errors_m,
                                        double max_distance_m, int steps) {
  if (errors_m.empty()) {
    throw std::invalid_argument("cannot export a CDF for an empty set of pairs");
  }
  if (steps < 2) {
    throw std::invalid_argument("CDF export needs at least 2 steps");
  }
  std::vector<double> sorted = errors_m;
  std::sort(sorted.begin(), sorted.end());
  std::vector<CdfPoint> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double d = max_distance_m * static_cast<double>(i) / static_cast<double>(steps - 1);
    const auto within = std::upper_bound(sorted.begin(), sorted.end(), d) - sorted.begin();
    out.push_back({d, 100.0 * static_cast<double>(within) / static_cast<double>(sorted.size())});
  }
  return out;
}

std::vector<CdfPoint> cdf_export(const std::vector<EvalPair>& pairs, double max_distance_m,
                                 int steps) {
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto& pair : pairs) {
    errors.push_back(geo::haversine_distance(pair.gold, pair.pred));
  }
  return cdf_export_errors(errors, max_distance_m, steps);
}

BaselinePrediction landmark_baseline(const mapgraph::MapBundle& bundle,
                                     const geo::GeoPoint& start, double radius_m) {
  const mapgraph::Entity* best = nullptr;
  auto best_level = mapgraph::ProminenceLevel::Unranked;
  // Hits come sorted by (distance, id), so the first entity seen at the
  // winning level is already the (distance, id) tie-break winner.
  for (const auto& hit : bundle.entity_index().query(start, radius_m)) {
    const mapgraph::Entity& e = bundle.entities()[hit.index];
    const auto level = mapgraph::prominence(e);
    if (!best || level > best_level) {
      best = &e;
      best_level = level;
    }
  }
  if (!best) return {start, true};
  return {best->centroid, false};
}

}  // namespace navsynth::metrics
