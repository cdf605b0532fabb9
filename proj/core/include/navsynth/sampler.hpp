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

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "navsynth/mapgraph.hpp"
#include "navsynth/rng.hpp"

namespace navsynth::sampler {

struct SamplerConfig {
  double min_start_goal_m = 200.0;   // start-goal centroid band, inclusive
  double max_start_goal_m = 2000.0;
  double max_goal_extent_m = 100.0;  // "small entity" rule for goals
  double near_disc_m = 100.0;        // near-landmark radius around the goal
  double proper_name_min_m = 200.0;  // proper names only beyond this distance
  double corridor_m = 50.0;          // "along the route" corridor half-width
  double beyond_search_m = 500.0;    // search radius for the beyond landmark
  double snap_tolerance_m = 500.0;
};

class SamplingError : public std::runtime_error {
 public:
  enum class Kind { NoEligibleGoal, NoEligibleStart };

  SamplingError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class UnnameableEntityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One sampled navigation scenario.
struct PathSample {
  const mapgraph::Entity* start = nullptr;
  const mapgraph::Entity* goal = nullptr;
  mapgraph::Route route;
  std::uint64_t seed = 0;
};

/// A single landmark or a same-type group ("two book shops"). Members are
/// sorted by id; the first member stands in for the group in spatial
/// computations.
struct Landmark {
  std::vector<const mapgraph::Entity*> members;
  std::string type_tag;  // surface type, e.g. "book shop"; may be empty for
                         // proper-named singles

  bool grouped() const { return members.size() > 1; }
  const mapgraph::Entity* representative() const { return members.front(); }
};

struct LandmarkSet {
  std::vector<Landmark> near;                       // within the near disc of the goal
  std::vector<const mapgraph::Entity*> main_pivots;  // along the route, in travel order
  const mapgraph::Entity* beyond = nullptr;          // on the goal street, past the goal
};

enum class NameForm { Proper, Indefinite, GroupedCount };

struct DisplayName {
  std::string surface;
  NameForm form = NameForm::Proper;
};

std::string to_string(NameForm f);

/// Uniform draw among entities whose extent fits the small-entity rule and
/// which can be verbalized (type tag or name). Throws NoEligibleGoal.
const mapgraph::Entity* sample_goal(const mapgraph::MapBundle& bundle, rng::Engine& rng,
                                    const SamplerConfig& config = {});

/// Uniform draw among entities in the distance band around the goal that
/// carry a name or a type tag. Throws NoEligibleStart.
const mapgraph::Entity* sample_start(const mapgraph::MapBundle& bundle,
                                     const mapgraph::Entity& goal, rng::Engine& rng,
                                     const SamplerConfig& config = {});

/// Goal, start, and the shortest route between them. Routing failures
/// propagate as mapgraph::RoutingError.
PathSample make_sample(const mapgraph::MapBundle& bundle, std::uint64_t seed,
                       const SamplerConfig& config = {});

/// The three landmark classes. Within each class, candidates collapse to
/// the most recognizable prominence level present; same-type multiples in
/// the near class merge into groups. Classes may be empty.
LandmarkSet pick_landmarks(const mapgraph::MapBundle& bundle, const PathSample& sample,
                           rng::Engine& rng, const SamplerConfig& config = {});

/// Naming rule: the verbatim proper name only when the entity is named and
/// far from the goal, otherwise an indefinite type description.
DisplayName display_name(const mapgraph::Entity& e, const mapgraph::Entity& goal,
                         const SamplerConfig& config = {});
DisplayName display_name(const Landmark& lm, const mapgraph::Entity& goal,
                         const SamplerConfig& config = {});

/// Bare noun phrase for the goal ("garden", "parking lot"); templates add
/// the article.
std::string goal_surface(const mapgraph::Entity& goal);

/// "a cafe" type description derived from amenity/shop/tourism/brand tags.
std::optional<std::string> type_surface(const mapgraph::Entity& e);

bool has_type_tag(const mapgraph::Entity& e);

/// Number words up to twelve, digits beyond.
std::string count_word(int n);

std::string pluralize(const std::string& noun);

/// Candidate sets exposed for audit against brute-force recomputation.
std::vector<const mapgraph::Entity*> eligible_goals(const mapgraph::MapBundle& bundle,
                                                    const SamplerConfig& config = {});
std::vector<const mapgraph::Entity*> eligible_starts(const mapgraph::MapBundle& bundle,
                                                     const mapgraph::Entity& goal,
                                                     const SamplerConfig& config = {});

}  // namespace navsynth::sampler
