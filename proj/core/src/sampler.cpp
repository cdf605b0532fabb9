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

#include "navsynth/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <set>

#include "navsynth/polyline.hpp"

namespace navsynth::sampler {

using mapgraph::Entity;
using mapgraph::MapBundle;

namespace {

const std::array<const char*, 4> type_keys = {"amenity", "shop", "tourism", "brand"};

std::string underscores_to_spaces(std::string s) {
  for (char& c : s) {
    if (c == '_') c = ' ';
  }
  return s;
}

// OSM-style tag values that read badly when mapped mechanically.
std::string map_tag_value(const std::string& value) {
  static const std::map<std::string, std::string> curated = {
      {"fast_food", "fast food restaurant"},
      {"place_of_worship", "place of worship"},
      {"parking", "parking lot"},
      {"public_bookcase", "public bookcase"},
  };
  auto it = curated.find(value);
  if (it != curated.end()) return it->second;
  return underscores_to_spaces(value);
}

std::string singularize(const std::string& word) {
  static const std::map<std::string, std::string> curated = {
      {"books", "book"}, {"clothes", "cloth"}, {"shoes", "shoe"},
      {"electronics", "electronics"}, {"antiques", "antique"},
  };
  auto it = curated.find(word);
  if (it != curated.end()) return it->second;
  if (word.size() > 3 && word.back() == 's') return word.substr(0, word.size() - 1);
  return word;
}

std::string article_for(const std::string& noun) {
  if (noun.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(noun.front())));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an" : "a";
}

bool displayable(const Entity& e, const Entity& goal, const SamplerConfig& config) {
  if (has_type_tag(e)) return true;
  if (!e.name || e.name->empty()) return false;
  return geo::haversine_distance(e.centroid, goal.centroid) > config.proper_name_min_m;
}

/// Keep only the entities at the most recognizable prominence level present.
template <typename Ptrs>
void restrict_to_top_prominence(Ptrs& candidates) {
  if (candidates.empty()) return;
  auto best = mapgraph::ProminenceLevel::Unranked;
  for (const Entity* e : candidates) best = std::max(best, mapgraph::prominence(*e));
  std::erase_if(candidates, [&](const Entity* e) { return mapgraph::prominence(*e) != best; });
}

}  // namespace

bool has_type_tag(const Entity& e) {
  for (const char* key : type_keys) {
    if (e.tags.count(key)) return true;
  }
  return false;
}

std::optional<std::string> type_surface(const Entity& e) {
  if (auto it = e.tags.find("amenity"); it != e.tags.end()) return map_tag_value(it->second);
  if (auto it = e.tags.find("shop"); it != e.tags.end()) {
    return singularize(map_tag_value(it->second)) + " shop";
  }
  if (auto it = e.tags.find("tourism"); it != e.tags.end()) return map_tag_value(it->second);
  if (auto it = e.tags.find("brand"); it != e.tags.end()) return it->second;
  return std::nullopt;
}

std::string pluralize(const std::string& noun) {
  // Pluralize the final word of a multiword phrase.
  const auto space = noun.rfind(' ');
  if (space != std::string::npos) {
    return noun.substr(0, space + 1) + pluralize(noun.substr(space + 1));
  }
  if (noun.empty()) return noun;
  const auto ends_with = [&](const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    return noun.size() >= n && noun.compare(noun.size() - n, n, suffix) == 0;
  };
  if (ends_with("s") || ends_with("x") || ends_with("z") || ends_with("ch") || ends_with("sh")) {
    return noun + "es";
  }
  if (noun.size() >= 2 && noun.back() == 'y') {
    const char prev = noun[noun.size() - 2];
    const bool vowel = prev == 'a' || prev == 'e' || prev == 'i' || prev == 'o' || prev == 'u';
    if (!vowel) return noun.substr(0, noun.size() - 1) + "ies";
  }
  return noun + "s";
}

std::string count_word(int n) {
  static const std::array<const char*, 13> words = {"zero", "one", "two",   "three", "four",
                                                    "five", "six", "seven", "eight", "nine",
                                                    "ten",  "eleven", "twelve"};
  if (n >= 0 && n < static_cast<int>(words.size())) return words[static_cast<std::size_t>(n)];
  return std::to_string(n);
}

std::string to_string(NameForm f) {
  switch (f) {
    case NameForm::Proper: return "proper";
    case NameForm::Indefinite: return "indefinite";
    case NameForm::GroupedCount: return "grouped";
  }
  return "proper";
}

DisplayName display_name(const Entity& e, const Entity& goal, const SamplerConfig& config) {
  const bool named = e.name && !e.name->empty();
  if (named && geo::haversine_distance(e.centroid, goal.centroid) > config.proper_name_min_m) {
    return {*e.name, NameForm::Proper};
  }
  if (auto type = type_surface(e)) {
    return {article_for(*type) + " " + *type, NameForm::Indefinite};
  }
  if (named) {
    // Near-goal entity without a type description: nothing but the proper
    // name can refer to it.
    return {*e.name, NameForm::Proper};
  }
  throw UnnameableEntityError("entity '" + e.id + "' has neither name nor type tag");
}

DisplayName display_name(const Landmark& lm, const Entity& goal, const SamplerConfig& config) {
  if (lm.grouped()) {
    return {count_word(static_cast<int>(lm.members.size())) + " " + pluralize(lm.type_tag),
            NameForm::GroupedCount};
  }
  return display_name(*lm.representative(), goal, config);
}

std::string goal_surface(const Entity& goal) {
  if (auto type = type_surface(goal)) return *type;
  if (goal.name && !goal.name->empty()) return *goal.name;
  throw UnnameableEntityError("goal '" + goal.id + "' has neither name nor type tag");
}

std::vector<const Entity*> eligible_goals(const MapBundle& bundle, const SamplerConfig& config) {
  std::vector<const Entity*> out;
  for (const Entity& e : bundle.entities()) {
    if (e.extent_radius_m > config.max_goal_extent_m) continue;
    if (!has_type_tag(e) && !(e.name && !e.name->empty())) continue;
    out.push_back(&e);
  }
  return out;
}

std::vector<const Entity*> eligible_starts(const MapBundle& bundle, const Entity& goal,
                                           const SamplerConfig& config) {
  std::vector<const Entity*> within = mapgraph::nearest_entities(
      bundle, goal.centroid, config.max_start_goal_m, [&](const Entity& e) {
        if (e.id == goal.id) return false;
        if (!(e.name && !e.name->empty()) && !has_type_tag(e)) return false;
        return geo::haversine_distance(e.centroid, goal.centroid) >= config.min_start_goal_m;
      });
  // Distance order from the index query; candidate order must be id order
  // so that the uniform draw is reproducible.
  std::sort(within.begin(), within.end(),
            [](const Entity* a, const Entity* b) { return a->id < b->id; });
  return within;
}

const Entity* sample_goal(const MapBundle& bundle, rng::Engine& rng, const SamplerConfig& config) {
  const auto eligible = eligible_goals(bundle, config);
  if (eligible.empty()) {
    throw SamplingError(SamplingError::Kind::NoEligibleGoal,
                        "no entity is small enough (extent <= " +
                            std::to_string(config.max_goal_extent_m) + " m) and nameable");
  }
  return eligible[rng::pick_index(rng, eligible)];
}

const Entity* sample_start(const MapBundle& bundle, const Entity& goal, rng::Engine& rng,
                           const SamplerConfig& config) {
  const auto eligible = eligible_starts(bundle, goal, config);
  if (eligible.empty()) {
    throw SamplingError(SamplingError::Kind::NoEligibleStart,
                        "no named or typed entity within [" +
                            std::to_string(config.min_start_goal_m) + ", " +
                            std::to_string(config.max_start_goal_m) + "] m of goal '" + goal.id +
                            "'");
  }
  return eligible[rng::pick_index(rng, eligible)];
}

PathSample make_sample(const MapBundle& bundle, std::uint64_t seed, const SamplerConfig& config) {
  rng::Engine rng(seed);
  PathSample sample;
  sample.seed = seed;
  sample.goal = sample_goal(bundle, rng, config);
  sample.start = sample_start(bundle, *sample.goal, rng, config);
  sample.route = mapgraph::shortest_path(bundle, sample.start->centroid, sample.goal->centroid,
                                         config.snap_tolerance_m);
  return sample;
}

namespace {

std::vector<const Entity*> corridor_candidates(const MapBundle& bundle,
                                               const mapgraph::Route& route,
                                               double corridor_m) {
  std::set<const Entity*> seen;
  const auto& line = route.polyline;
  for (std::size_t i = 0; i + 1 < line.size(); ++i) {
    const double seg_len = geo::haversine_distance(line[i], line[i + 1]);
    const geo::GeoPoint mid = geo::interpolate(line[i], line[i + 1], 0.5);
    const double radius = seg_len / 2.0 + corridor_m + 1.0;
    for (const auto& hit : bundle.entity_index().query(mid, radius)) {
      seen.insert(&bundle.entities()[hit.index]);
    }
  }
  std::vector<const Entity*> out;
  for (const Entity* e : seen) {
    if (geo::project_to_polyline(line, e->centroid).distance_m <= corridor_m) {
      out.push_back(e);
    }
  }
  return out;
}

}  // namespace

LandmarkSet pick_landmarks(const MapBundle& bundle, const PathSample& sample, rng::Engine& rng,
                           const SamplerConfig& config) {
  LandmarkSet out;
  const Entity& goal = *sample.goal;
  const std::set<std::string> excluded = {sample.goal->id, sample.start->id};

  // (i) Near landmarks: inside the near disc, always described by type, so a
  // type tag is required. Same-type multiples merge into groups.
  auto near_entities = mapgraph::nearest_entities(
      bundle, goal.centroid, config.near_disc_m, [&](const Entity& e) {
        return !excluded.count(e.id) && type_surface(e).has_value();
      });
  restrict_to_top_prominence(near_entities);
  {
    std::map<std::string, std::vector<const Entity*>> by_type;
    for (const Entity* e : near_entities) by_type[*type_surface(*e)].push_back(e);
    for (auto& [type, members] : by_type) {
      std::sort(members.begin(), members.end(),
                [](const Entity* a, const Entity* b) { return a->id < b->id; });
      out.near.push_back({std::move(members), type});
    }
    // by_type is id-ordered per type; the pick among equals is random.
    rng::shuffle(rng, out.near);
  }

  std::set<std::string> taken;
  for (const auto& lm : out.near) {
    for (const Entity* e : lm.members) taken.insert(e->id);
  }

  // (ii) Main pivots: along the route corridor, outside the near disc.
  auto pivots = corridor_candidates(bundle, sample.route, config.corridor_m);
  std::erase_if(pivots, [&](const Entity* e) {
    if (excluded.count(e->id) || taken.count(e->id)) return true;
    if (geo::haversine_distance(e->centroid, goal.centroid) <= config.near_disc_m) return true;
    return !displayable(*e, goal, config);
  });
  restrict_to_top_prominence(pivots);
  {
    std::vector<std::pair<double, const Entity*>> ordered;
    for (const Entity* e : pivots) {
      ordered.emplace_back(geo::project_to_polyline(sample.route.polyline, e->centroid).arc_m, e);
    }
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second->id < b.second->id;
    });
    for (const auto& [arc, e] : ordered) {
      out.main_pivots.push_back(e);
      taken.insert(e->id);
    }
  }

  // (iii) Beyond landmark: on the goal's street, past the goal in the
  // direction of travel.
  out.beyond = nullptr;
  if (sample.route.polyline.size() >= 2) {
    const auto goal_edge = mapgraph::nearest_edge(bundle, goal.centroid, 300.0);
    if (goal_edge >= 0) {
      const auto& edge = bundle.graph().edge(static_cast<std::uint32_t>(goal_edge));
      if (edge.street) {
        const auto& line = sample.route.polyline;
        geo::Bearing travel = geo::bearing(line[line.size() - 2], line.back());
        auto street_edges_it = bundle.edges_by_street().find(*edge.street);
        if (street_edges_it != bundle.edges_by_street().end()) {
          const auto& street_edges = street_edges_it->second;
          auto candidates = mapgraph::nearest_entities(
              bundle, goal.centroid, config.beyond_search_m, [&](const Entity& e) {
                if (excluded.count(e.id) || taken.count(e.id)) return false;
                if (!displayable(e, goal, config)) return false;
                // Must sit on the same street...
                double min_d = std::numeric_limits<double>::infinity();
                for (const auto idx : street_edges) {
                  const auto& se = bundle.graph().edge(idx);
                  min_d = std::min(min_d, geo::point_to_segment_distance_m(
                                              bundle.graph().node_point(se.u),
                                              bundle.graph().node_point(se.v), e.centroid));
                }
                if (min_d > config.corridor_m) return false;
                // ...and project past the goal along the travel direction.
                geo::Bearing to_candidate(0.0);
                try {
                  to_candidate = geo::bearing(goal.centroid, e.centroid);
                } catch (const geo::UndefinedBearingError&) {
                  return false;
                }
                double diff = std::fmod(to_candidate.degrees() - travel.degrees() + 360.0, 360.0);
                if (diff > 180.0) diff = 360.0 - diff;
                return diff < 90.0;
              });
          restrict_to_top_prominence(candidates);
          if (!candidates.empty()) {
            // nearest_entities orders by (distance, id) already.
            out.beyond = candidates.front();
          }
        }
      }
    }
  }
  return out;
}

}  // namespace navsynth::sampler
