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
#include <numbers>

#include "bundles.hpp"
#include "navsynth/metrics.hpp"
#include "navsynth/rng.hpp"

using namespace navsynth;
using geo::GeoPoint;
using metrics::EvalPair;
namespace ts = navsynth::testsupport;

namespace {

/// A pair on the equator whose haversine error is exactly `error_m`.
EvalPair equator_pair(double error_m) {
  const double dlon_deg = error_m / geo::earth_radius_m * 180.0 / std::numbers::pi;
  return {GeoPoint(0.0, 0.0), GeoPoint(0.0, dlon_deg)};
}

}  // namespace

TEST_CASE("perfect predictions score perfectly") {
  std::vector<EvalPair> pairs;
  for (int i = 0; i < 5; ++i) {
    const GeoPoint p(40.0 + i, -74.0 + i);
    pairs.push_back({p, p});
  }
  const auto report = metrics::evaluate(pairs);
  CHECK(report.mae_m == 0.0);
  CHECK(report.medae_m == 0.0);
  CHECK(report.maxae_m == 0.0);
  CHECK(report.acc100() == 100.0);
  CHECK(report.acc250() == 100.0);
}

TEST_CASE("median is the floor(n/2) order statistic") {
  const auto report = metrics::evaluate_errors({10.0, 20.0, 30.0, 40.0});
  CHECK(report.medae_m == 30.0);  // index 2 of the ascending sort
  CHECK(report.mae_m == doctest::Approx(25.0));
  CHECK(report.maxae_m == 40.0);

  const auto odd = metrics::evaluate_errors({5.0, 1.0, 9.0});
  CHECK(odd.medae_m == 5.0);
}

TEST_CASE("accuracy at radii counts inclusively") {
  const auto report = metrics::evaluate_errors({50.0, 150.0, 300.0});
  CHECK(report.acc100() == doctest::Approx(100.0 / 3.0));
  CHECK(report.acc250() == doctest::Approx(200.0 / 3.0));

  // The boundary error counts as within.
  const auto edge = metrics::evaluate_errors({100.0, 250.0});
  CHECK(edge.acc100() == 50.0);
  CHECK(edge.acc250() == 100.0);
}

TEST_CASE("constant-error closed forms") {
  const metrics::MetricsConfig cfg;
  for (const double c : {1.0, 776.0, 20'037'000.0}) {
    const auto report = metrics::evaluate_errors(std::vector<double>(4, c), cfg);
    CHECK(report.mae_m == doctest::Approx(c).epsilon(1e-12));
    CHECK(report.medae_m == c);
    CHECK(report.maxae_m == c);
    REQUIRE(report.auc.has_value());
    const double closed = std::log(c + cfg.epsilon) / std::log(cfg.h_max_m);
    CHECK(*report.auc == doctest::Approx(closed).epsilon(1e-9));
  }

  // The 776 m constant-error case pins the natural-log reading: it must
  // land near 0.396.
  const auto landmark_like = metrics::evaluate_errors(std::vector<double>(10, 776.0), cfg);
  CHECK(*landmark_like.auc == doctest::Approx(0.396).epsilon(0.0025));
}

TEST_CASE("coordinate pairs reproduce exact constant errors") {
  std::vector<EvalPair> pairs(3, equator_pair(776.0));
  const auto report = metrics::evaluate(pairs);
  CHECK(report.mae_m == doctest::Approx(776.0).epsilon(1e-9));
  CHECK(report.medae_m == doctest::Approx(776.0).epsilon(1e-9));
  CHECK(*report.auc == doctest::Approx(std::log(776.0 + 1e-5) / std::log(20'037'000.0))
                           .epsilon(1e-9));
}

TEST_CASE("AUC is monotone under error scaling") {
  rng::Engine eng(7);
  std::vector<double> errors;
  for (int i = 0; i < 50; ++i) {
    errors.push_back(1.0 + static_cast<double>(rng::bounded(eng, 1'000'000)) / 100.0);
  }
  const auto base = metrics::evaluate_errors(errors);
  for (const double scale : {1.5, 3.0, 10.0}) {
    std::vector<double> scaled;
    for (const double e : errors) scaled.push_back(e * scale);
    const auto report = metrics::evaluate_errors(scaled);
    CHECK(*report.auc >= *base.auc);
  }
}

TEST_CASE("metrics are permutation invariant") {
  rng::Engine eng(9);
  std::vector<double> errors;
  for (int i = 0; i < 101; ++i) {
    errors.push_back(static_cast<double>(rng::bounded(eng, 500'000)) / 100.0);
  }
  const auto base = metrics::evaluate_errors(errors);
  std::vector<double> shuffled = errors;
  rng::shuffle(eng, shuffled);
  const auto permuted = metrics::evaluate_errors(shuffled);
  CHECK(base.mae_m == doctest::Approx(permuted.mae_m).epsilon(1e-12));
  CHECK(base.medae_m == permuted.medae_m);
  CHECK(base.maxae_m == permuted.maxae_m);
  CHECK(*base.auc == doctest::Approx(*permuted.auc).epsilon(1e-12));
  CHECK(base.acc100() == permuted.acc100());

  // Median equals a brute-force full sort at index floor(n/2).
  std::sort(errors.begin(), errors.end());
  CHECK(base.medae_m == errors[errors.size() / 2]);
  CHECK(base.acc100() <= base.acc250());
}

TEST_CASE("degenerate inputs") {
  CHECK_THROWS_AS(metrics::evaluate_errors({}), std::invalid_argument);

  // A single pair yields every metric except AUC.
  const auto single = metrics::evaluate_errors({42.0});
  CHECK_FALSE(single.auc.has_value());
  CHECK(single.medae_m == 42.0);
}

TEST_CASE("cdf export: step function and flat line") {
  const auto step = metrics::cdf_export({equator_pair(100.0)}, 200.0, 21);
  REQUIRE(step.size() == 21);
  for (const auto& point : step) {
    if (point.distance_m < 100.0 - 1e-6) {
      CHECK(point.cumulative_pct == 0.0);
    } else {
      CHECK(point.cumulative_pct == 100.0);
    }
  }

  const auto flat = metrics::cdf_export({equator_pair(0.0), equator_pair(0.0)}, 500.0, 11);
  for (const auto& point : flat) CHECK(point.cumulative_pct == 100.0);
}

TEST_CASE("cdf grid equals brute-force counting and is monotone") {
  rng::Engine eng(12);
  std::vector<double> errors;
  for (int i = 0; i < 333; ++i) {
    errors.push_back(static_cast<double>(rng::bounded(eng, 400'000)) / 100.0);
  }
  const double max_d = 5000.0;
  const int steps = 41;
  const auto cdf = metrics::cdf_export_errors(errors, max_d, steps);
  REQUIRE(cdf.size() == static_cast<std::size_t>(steps));

  double prev = -1.0;
  for (int i = 0; i < steps; ++i) {
    const double d = max_d * i / (steps - 1);
    int count = 0;
    for (const double e : errors) {
      if (e <= d) ++count;
    }
    CHECK(cdf[i].distance_m == doctest::Approx(d));
    CHECK(cdf[i].cumulative_pct ==
          doctest::Approx(100.0 * count / static_cast<double>(errors.size())));
    CHECK(cdf[i].cumulative_pct >= prev);
    prev = cdf[i].cumulative_pct;
  }
}

TEST_CASE("landmark baseline prefers prominence, then distance, then id") {
  ts::TempDir dir;
  ts::write_lines(dir.file("entities.jsonl"),
                  {
                      ts::entity_point_line("shop-close", std::nullopt, {{"shop", "books"}},
                                            -74.0005, 40.7000),
                      ts::entity_point_line("wiki-far", "Silver Tower",
                                            {{"wikipedia", "en:Silver_Tower"}}, -74.008, 40.7000),
                  });
  ts::write_lines(dir.file("streets.jsonl"),
                  {ts::node_line("n1", -74.0, 40.7), ts::node_line("n2", -73.999, 40.7),
                   ts::edge_line("n1", "n2", std::nullopt)});
  const auto bundle = mapgraph::load_bundle(dir.file("entities.jsonl"), dir.file("streets.jsonl"));

  // The wiki-linked entity wins despite being farther.
  const auto pred = metrics::landmark_baseline(bundle, GeoPoint(40.7000, -74.0000));
  CHECK_FALSE(pred.fallback);
  CHECK(pred.point == bundle.entity("wiki-far")->centroid);

  // An empty disc falls back to the start itself.
  const auto empty = metrics::landmark_baseline(bundle, GeoPoint(40.77, -74.0));
  CHECK(empty.fallback);
  CHECK(empty.point == GeoPoint(40.77, -74.0));
}

TEST_CASE("landmark baseline equals a brute-force argmax on a random bundle") {
  ts::TempDir dir;
  const auto files = ts::write_scatter(dir.path(), {.n_entities = 300, .seed = 44});
  const auto bundle = mapgraph::load_bundle(files.entities_path, files.streets_path);

  rng::Engine eng(45);
  auto uniform = [&](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng::bounded(eng, 1u << 24)) /
                             static_cast<double>(1u << 24));
  };
  for (int q = 0; q < 500; ++q) {
    const GeoPoint start(uniform(40.66, 40.74), uniform(-74.06, -73.94));
    const auto got = metrics::landmark_baseline(bundle, start);

    const mapgraph::Entity* best = nullptr;
    double best_d = 0.0;
    for (const auto& e : bundle.entities()) {
      const double d = geo::haversine_distance(start, e.centroid);
      if (d > 1000.0) continue;
      if (!best) {
        best = &e;
        best_d = d;
        continue;
      }
      const auto lhs = mapgraph::prominence(e);
      const auto rhs = mapgraph::prominence(*best);
      if (lhs > rhs || (lhs == rhs && (d < best_d || (d == best_d && e.id < best->id)))) {
        best = &e;
        best_d = d;
      }
    }
    if (!best) {
      CHECK(got.fallback);
      CHECK(got.point == start);
    } else {
      CHECK_FALSE(got.fallback);
      CHECK(got.point == best->centroid);
    }
  }
}
