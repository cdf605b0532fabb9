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

#include "navsynth/generator.hpp"

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "navsynth/polyline.hpp"

namespace navsynth::generator {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using mapgraph::Entity;
using mapgraph::MapBundle;

// ---------------------------------------------------------------------------
// Modes

Mode mode_from_string(const std::string& s) {
  if (s == "cfg") return Mode::Cfg;
  if (s == "cfg-allocentric") return Mode::CfgAllocentric;
  if (s == "cfg-egocentric") return Mode::CfgEgocentric;
  if (s == "cfg-minimal") return Mode::CfgMinimal;
  if (s == "dummy") return Mode::Dummy;
  if (s == "prompt") return Mode::Prompt;
  throw GenerationError("unknown generation mode '" + s + "'");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Cfg: return "cfg";
    case Mode::CfgAllocentric: return "cfg-allocentric";
    case Mode::CfgEgocentric: return "cfg-egocentric";
    case Mode::CfgMinimal: return "cfg-minimal";
    case Mode::Dummy: return "dummy";
    case Mode::Prompt: return "prompt";
  }
  return "cfg";
}

// ---------------------------------------------------------------------------
// JSONL serialization

namespace {

ordered_json coord_json(const geo::GeoPoint& p) {
  return ordered_json::array({p.lon(), p.lat()});
}

geo::GeoPoint coord_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw GenerationError("coordinate must be a [lon, lat] pair");
  }
  return geo::GeoPoint(j[1].get<double>(), j[0].get<double>());
}

std::string template_id_hex(std::uint64_t id) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

ordered_json landmark_json(const LandmarkRecord& lm) {
  ordered_json j;
  j["ids"] = lm.ids;
  j["surface"] = lm.surface;
  j["form"] = lm.form;
  j["type"] = lm.type;
  return j;
}

LandmarkRecord landmark_from_json(const json& j) {
  LandmarkRecord lm;
  lm.ids = j.at("ids").get<std::vector<std::string>>();
  lm.surface = j.at("surface").get<std::string>();
  lm.form = j.at("form").get<std::string>();
  lm.type = j.at("type").get<std::string>();
  return lm;
}

}  // namespace

std::string to_jsonl(const InstructionRecord& record) {
  ordered_json j;
  j["id"] = record.id;
  j["mode"] = record.mode;
  j["instruction"] = record.instruction;
  j["start"] = coord_json(record.start);
  j["goal"] = coord_json(record.goal);
  ordered_json route = ordered_json::array();
  for (const auto& p : record.route) route.push_back(coord_json(p));
  j["route"] = std::move(route);
  if (record.template_id) {
    j["template_id"] = template_id_hex(*record.template_id);
  } else {
    j["template_id"] = nullptr;
  }
  ordered_json lms;
  ordered_json near = ordered_json::array();
  for (const auto& lm : record.landmarks.near) near.push_back(landmark_json(lm));
  lms["near"] = std::move(near);
  ordered_json main_pivots = ordered_json::array();
  for (const auto& lm : record.landmarks.main) main_pivots.push_back(landmark_json(lm));
  lms["main"] = std::move(main_pivots);
  lms["beyond"] = record.landmarks.beyond ? landmark_json(*record.landmarks.beyond)
                                          : ordered_json(nullptr);
  j["landmarks"] = std::move(lms);
  if (record.features) {
    const FeaturesRecord& f = *record.features;
    ordered_json fj;
    fj["cardinal_start_to_goal"] = f.cardinal_start_to_goal;
    fj["cardinal_to_goal"] = f.cardinal_to_goal;
    fj["ego_side"] = f.ego_side;
    fj["n_intersections"] = f.n_intersections;
    fj["n_blocks"] = f.n_blocks;
    fj["block_position_ego"] = f.block_position_ego;
    fj["block_position_allo"] =
        f.block_position_allo ? ordered_json(*f.block_position_allo) : ordered_json(nullptr);
    fj["slots"] = f.slots;
    j["features"] = std::move(fj);
  } else {
    j["features"] = nullptr;
  }
  j["seed"] = record.seed;
  return j.dump();
}

InstructionRecord record_from_jsonl(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw GenerationError("invalid JSON record");
  }
  try {
    InstructionRecord r;
    r.id = j.at("id").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.instruction = j.at("instruction").get<std::string>();
    r.start = coord_from_json(j.at("start"));
    r.goal = coord_from_json(j.at("goal"));
    for (const auto& p : j.at("route")) r.route.push_back(coord_from_json(p));
    if (!j.at("template_id").is_null()) {
      r.template_id = std::stoull(j["template_id"].get<std::string>(), nullptr, 16);
    }
    const json& lms = j.at("landmarks");
    for (const auto& lm : lms.at("near")) r.landmarks.near.push_back(landmark_from_json(lm));
    for (const auto& lm : lms.at("main")) r.landmarks.main.push_back(landmark_from_json(lm));
    if (!lms.at("beyond").is_null()) r.landmarks.beyond = landmark_from_json(lms["beyond"]);
    if (!j.at("features").is_null()) {
      const json& fj = j["features"];
      FeaturesRecord f;
      f.cardinal_start_to_goal = fj.at("cardinal_start_to_goal").get<std::string>();
      f.cardinal_to_goal = fj.at("cardinal_to_goal").get<std::map<std::string, std::string>>();
      f.ego_side = fj.at("ego_side").get<std::map<std::string, std::string>>();
      f.n_intersections = fj.at("n_intersections").get<int>();
      f.n_blocks = fj.at("n_blocks").get<int>();
      f.block_position_ego = fj.at("block_position_ego").get<std::string>();
      if (!fj.at("block_position_allo").is_null()) {
        f.block_position_allo = fj["block_position_allo"].get<std::string>();
      }
      f.slots = fj.at("slots").get<std::map<std::string, std::string>>();
      r.features = std::move(f);
    }
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const json::exception& e) {
    throw GenerationError(std::string("record does not match the dataset schema: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rewriters

FixtureRewriter::FixtureRewriter(const std::string& path) : path_(path) {
  std::ifstream in(path);
  if (!in) {
    throw GenerationError("cannot open rewriter fixture file '" + path + "'");
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("prompt") || !j.contains("text")) {
      throw GenerationError("fixture line " + std::to_string(line_no) +
                            " must be {\"prompt\": str, \"text\": str}");
    }
    responses_[j["prompt"].get<std::string>()] = j["text"].get<std::string>();
  }
}

std::string FixtureRewriter::rewrite(const std::string& prompt) {
  auto it = responses_.find(prompt);
  if (it == responses_.end()) {
    throw GenerationError("fixture '" + path_ + "' has no response for the prompt: " + prompt);
  }
  return it->second;
}

HttpRewriter::HttpRewriter(const std::string& url) {
  if (url.rfind("https://", 0) == 0) {
    throw GenerationError("https rewriter endpoints are not supported in this build; use http");
  }
  if (url.rfind("http://", 0) != 0) {
    throw GenerationError("rewriter URL must start with http://");
  }
  const auto path_pos = url.find('/', std::strlen("http://"));
  if (path_pos == std::string::npos) {
    host_ = url;
    path_ = "/";
  } else {
    host_ = url.substr(0, path_pos);
    path_ = url.substr(path_pos);
  }
}

std::string HttpRewriter::rewrite(const std::string& prompt) {
  httplib::Client client(host_);
  client.set_connection_timeout(10);
  client.set_read_timeout(60);
  httplib::Headers headers;
  if (const char* token = std::getenv("NAVSYNTH_REWRITER_TOKEN")) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  json body;
  body["prompt"] = prompt;
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw GenerationError("rewriter endpoint unreachable: " + host_);
  }
  if (res->status != 200) {
    throw GenerationError("rewriter endpoint returned HTTP " + std::to_string(res->status));
  }
  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("text") || !reply["text"].is_string()) {
    throw GenerationError("rewriter reply must be {\"text\": str}");
  }
  return reply["text"].get<std::string>();
}

std::unique_ptr<Rewriter> make_rewriter(const std::string& spec) {
  if (spec == "identity") return std::make_unique<IdentityRewriter>();
  if (spec.rfind("fixture:", 0) == 0) {
    return std::make_unique<FixtureRewriter>(spec.substr(std::strlen("fixture:")));
  }
  if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0) {
    return std::make_unique<HttpRewriter>(spec);
  }
  if (spec.rfind("http:", 0) == 0) {
    return std::make_unique<HttpRewriter>(spec.substr(std::strlen("http:")));
  }
  throw GenerationError("unknown rewriter '" + spec +
                        "'; expected identity, fixture:PATH, or http:URL");
}

// ---------------------------------------------------------------------------
// Slot resolution and instantiation

std::map<std::string, std::string> resolve_slots(const grammar::PlaceholderRegistry& registry,
                                                 const sampler::PathSample& sample,
                                                 const sampler::LandmarkSet& landmarks,
                                                 const relations::SpatialFeatures& features,
                                                 const sampler::SamplerConfig& config) {
  std::map<std::string, std::string> slots;
  const Entity& goal = *sample.goal;

  auto set_slot = [&](const char* name, const std::string& value) {
    if (registry.index_of(name) >= 0) slots[name] = value;
  };

  set_slot("END_POINT", sampler::goal_surface(goal));

  if (!landmarks.near.empty()) {
    set_slot("NEAR_PIVOT", sampler::display_name(landmarks.near.front(), goal, config).surface);
    const std::string& near_id = landmarks.near.front().representative()->id;
    if (auto it = features.cardinal_to_goal.find(near_id); it != features.cardinal_to_goal.end()) {
      set_slot("CARDINAL_FROM_NEAR", geo::surface_word(it->second));
    }
  }

  if (!landmarks.main_pivots.empty()) {
    const Entity& pivot = *landmarks.main_pivots.front();
    set_slot("MAIN_PIVOT", sampler::display_name(pivot, goal, config).surface);
    if (auto it = features.cardinal_to_goal.find(pivot.id); it != features.cardinal_to_goal.end()) {
      set_slot("CARDINAL_DIRECTION", geo::surface_word(it->second));
    }
    if (auto it = features.ego_side.find(pivot.id); it != features.ego_side.end()) {
      set_slot("EGO_SIDE", geo::surface_word(it->second));
    }
    if (landmarks.main_pivots.size() >= 2) {
      set_slot("MAIN_NEAR_PIVOT",
               sampler::display_name(*landmarks.main_pivots.back(), goal, config).surface);
    }
  }

  if (landmarks.beyond) {
    set_slot("BEYOND_PIVOT", sampler::display_name(*landmarks.beyond, goal, config).surface);
  }

  if (features.n_intersections >= 1) {
    set_slot("INTERSECTIONS", sampler::count_word(features.n_intersections));
  }
  if (features.n_blocks >= 1) {
    set_slot("BLOCKS", sampler::count_word(features.n_blocks));
  }
  set_slot("GOAL_POSITION_EGO", relations::surface_phrase(features.block_position_ego));
  set_slot("GOAL_POSITION_ALLO", relations::surface_phrase(features.block_position_allo));
  return slots;
}

namespace {

struct Span {
  std::size_t begin, end;
  std::string slot;
};

std::string instantiate_with_spans(const grammar::TemplateSet& set, const grammar::Template& t,
                                   const std::map<std::string, std::string>& slots,
                                   std::vector<Span>* spans) {
  std::string out;
  for (const grammar::Token& tok : t.tokens) {
    std::string word;
    std::string slot_name;
    if (tok.placeholder) {
      slot_name = set.registry().at(tok.id).name;
      auto it = slots.find(slot_name);
      if (it == slots.end()) {
        throw MissingFeatureError("template mentions '" + slot_name +
                                  "' but no value is available for this sample");
      }
      word = it->second;
    } else {
      word = set.literals().text(tok.id);
    }
    if (word.empty()) continue;
    const char c = word.front();
    const bool closing = c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
    if (!out.empty() && !closing) out.push_back(' ');
    const std::size_t begin = out.size();
    out += word;
    if (!slot_name.empty() && spans) {
      spans->push_back({begin, out.size(), slot_name});
    }
  }
  // Single-space normalization: the join above never emits runs of spaces
  // unless a substituted surface contains them.
  std::string normalized;
  normalized.reserve(out.size());
  bool prev_space = false;
  for (char c : out) {
    const bool space = c == ' ';
    if (space && prev_space) continue;
    normalized.push_back(c);
    prev_space = space;
  }
  if (spans && normalized.size() != out.size()) {
    spans->clear();  // spans are only used for diff attribution; drop if shifted
  }
  return normalized;
}

}  // namespace

std::string instantiate(const grammar::TemplateSet& set, const grammar::Template& t,
                        const std::map<std::string, std::string>& slots) {
  return instantiate_with_spans(set, t, slots, nullptr);
}

// ---------------------------------------------------------------------------
// Dummy phrases and prompts

std::span<const std::string> dummy_phrases() {
  // Original list; intentionally free of directions, counts, and landmarks.
  static const std::vector<std::string> phrases = {
      "Meet me here.",
      "Let's meet at this spot.",
      "Join me at this place.",
      "I'll be waiting for you here.",
      "Come find me at this spot.",
      "We should meet at this exact spot.",
      "This is where we'll meet.",
      "Let's get together at this place.",
      "Meet me at this very spot.",
      "I'll see you here.",
      "Find me at this place.",
      "We'll meet up here.",
      "Come meet me at this spot.",
      "This is our meeting place.",
      "Wait for me here.",
      "I'm here, come join me.",
      "Let's gather at this spot.",
      "You can find me here.",
      "Catch up with me here.",
      "Swing by and meet me here.",
      "Let's see each other at this place.",
      "Come over to this spot to meet me.",
      "We can meet at this place.",
      "I'm waiting at this spot.",
      "Please meet me here.",
      "Here is where I'll be.",
      "Let's meet up at this very place.",
      "Stop by and find me here.",
      "Come along and meet me at this place.",
      "This spot is where we will meet.",
      "Meet me at this meeting point.",
  };
  return phrases;
}

const std::string& dummy_instruction(rng::Engine& rng) {
  const auto phrases = dummy_phrases();
  return phrases[rng::bounded(rng, phrases.size())];
}

std::string build_prompt(const std::string& instruction) {
  return "rephrase the subsequent navigation instruction, ensuring it explains how to travel "
         "from the starting position to the destination: " +
         instruction;
}

bool has_placeholder_residue(const std::string& text) {
  std::size_t run = 0;
  for (char c : text) {
    if ((c >= 'A' && c <= 'Z') || c == '_') {
      if (++run >= 4) return true;
    } else {
      run = 0;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Dataset generation

namespace {

LandmarkRecord landmark_record(const sampler::Landmark& lm, const Entity& goal,
                               const sampler::SamplerConfig& config) {
  LandmarkRecord rec;
  for (const Entity* e : lm.members) rec.ids.push_back(e->id);
  const auto dn = sampler::display_name(lm, goal, config);
  rec.surface = dn.surface;
  rec.form = sampler::to_string(dn.form);
  rec.type = lm.type_tag;
  return rec;
}

LandmarkRecord landmark_record(const Entity& e, const Entity& goal,
                               const sampler::SamplerConfig& config) {
  LandmarkRecord rec;
  rec.ids.push_back(e.id);
  const auto dn = sampler::display_name(e, goal, config);
  rec.surface = dn.surface;
  rec.form = sampler::to_string(dn.form);
  rec.type = sampler::type_surface(e).value_or("");
  return rec;
}

FeaturesRecord features_record(const relations::SpatialFeatures& f,
                               const std::map<std::string, std::string>& substituted) {
  FeaturesRecord rec;
  rec.cardinal_start_to_goal = geo::to_string(f.cardinal_start_to_goal);
  for (const auto& [id, card] : f.cardinal_to_goal) rec.cardinal_to_goal[id] = geo::to_string(card);
  for (const auto& [id, side] : f.ego_side) rec.ego_side[id] = geo::to_string(side);
  rec.n_intersections = f.n_intersections;
  rec.n_blocks = f.n_blocks;
  rec.block_position_ego = relations::to_string(f.block_position_ego);
  if (f.block_position_allo) rec.block_position_allo = f.block_position_allo->surface();
  rec.slots = substituted;
  return rec;
}

std::string record_id(Mode mode, std::uint64_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08llu", static_cast<unsigned long long>(index));
  return to_string(mode) + "-" + buf;
}

/// Template indices grouped by placeholder mask for O(#masks) compatibility
/// scans instead of O(#templates).
class TemplatePool {
 public:
  TemplatePool(const grammar::TemplateSet& set, std::vector<std::uint32_t> members)
      : size_(members.size()) {
    std::map<std::uint32_t, std::vector<std::uint32_t>> by_mask;
    for (const auto idx : members) by_mask[set.at(idx).placeholder_mask].push_back(idx);
    for (auto& [mask, indices] : by_mask) {
      groups_.push_back({mask, std::move(indices)});
    }
  }

  std::size_t size() const { return size_; }

  /// Uniform pick among compatible templates, or -1 when none qualify.
  std::int64_t pick(std::uint32_t available_mask, std::uint32_t required_mask,
                    rng::Engine& rng) const {
    std::uint64_t total = 0;
    for (const auto& g : groups_) {
      if (compatible(g.mask, available_mask, required_mask)) total += g.indices.size();
    }
    if (total == 0) return -1;
    std::uint64_t k = rng::bounded(rng, total);
    for (const auto& g : groups_) {
      if (!compatible(g.mask, available_mask, required_mask)) continue;
      if (k < g.indices.size()) return g.indices[k];
      k -= g.indices.size();
    }
    return -1;  // unreachable
  }

 private:
  static bool compatible(std::uint32_t mask, std::uint32_t avail, std::uint32_t required) {
    return (mask & ~avail) == 0 && (required & ~mask) == 0;
  }

  struct Group {
    std::uint32_t mask;
    std::vector<std::uint32_t> indices;
  };

  std::size_t size_ = 0;
  std::vector<Group> groups_;
};

struct RecordContext {
  const MapBundle& bundle;
  const GenerationConfig& config;
  const TemplatePool* pool;        // null for dummy mode
  Rewriter* rewriter;              // non-null for prompt mode
  std::mutex* rewriter_mutex;      // non-null when the rewriter is serial
  std::uint32_t required_mask;     // registry required mask (strict pass)
  std::uint32_t end_point_mask;    // END_POINT bit, kept even when relaxed
};

std::optional<InstructionRecord> make_record(const RecordContext& ctx, std::uint64_t index) {
  const GenerationConfig& cfg = ctx.config;
  const std::uint64_t record_seed = rng::derive_seed(cfg.seed, index);
  rng::Engine rng(record_seed);

  for (int attempt = 0; attempt <= cfg.retries; ++attempt) {
    try {
      sampler::PathSample sample;
      sample.seed = record_seed;
      sample.goal = sampler::sample_goal(ctx.bundle, rng, cfg.sampler);
      sample.start = sampler::sample_start(ctx.bundle, *sample.goal, rng, cfg.sampler);
      sample.route = mapgraph::shortest_path(ctx.bundle, sample.start->centroid,
                                             sample.goal->centroid, cfg.sampler.snap_tolerance_m);

      InstructionRecord record;
      record.id = record_id(cfg.mode, index);
      record.mode = to_string(cfg.mode);
      record.start = sample.start->centroid;
      record.goal = sample.goal->centroid;
      record.route = sample.route.polyline;
      record.seed = record_seed;

      if (cfg.mode == Mode::Dummy) {
        record.instruction = dummy_instruction(rng);
        return record;
      }

      const auto landmarks = sampler::pick_landmarks(ctx.bundle, sample, rng, cfg.sampler);
      const auto features = relations::compute_features(ctx.bundle, sample, landmarks);
      const auto slots = resolve_slots(cfg.templates->registry(), sample, landmarks, features,
                                       cfg.sampler);

      std::uint32_t avail = 0;
      for (const auto& [name, value] : slots) {
        avail |= 1u << cfg.templates->registry().index_of(name);
      }
      std::int64_t choice = ctx.pool->pick(avail, (ctx.required_mask & avail) | ctx.end_point_mask,
                                           rng);
      if (choice < 0) {
        // Fall back to plain subset compatibility (END_POINT still required).
        choice = ctx.pool->pick(avail, ctx.end_point_mask, rng);
      }
      if (choice < 0) continue;  // nothing fits this sample; resample

      const grammar::Template& tmpl = cfg.templates->at(static_cast<std::size_t>(choice));
      std::map<std::string, std::string> substituted;
      for (const auto& name : cfg.templates->placeholder_names(tmpl)) {
        substituted[name] = slots.at(name);
      }
      const std::string text = instantiate(*cfg.templates, tmpl, slots);

      if (cfg.mode == Mode::Prompt) {
        const std::string prompt = build_prompt(text);
        if (ctx.rewriter_mutex) {
          std::lock_guard lock(*ctx.rewriter_mutex);
          record.instruction = ctx.rewriter->rewrite(prompt);
        } else {
          record.instruction = ctx.rewriter->rewrite(prompt);
        }
      } else {
        record.instruction = text;
        record.template_id = tmpl.id;
      }

      for (const auto& lm : landmarks.near) {
        record.landmarks.near.push_back(landmark_record(lm, *sample.goal, cfg.sampler));
      }
      for (const Entity* e : landmarks.main_pivots) {
        record.landmarks.main.push_back(landmark_record(*e, *sample.goal, cfg.sampler));
      }
      if (landmarks.beyond) {
        record.landmarks.beyond = landmark_record(*landmarks.beyond, *sample.goal, cfg.sampler);
      }
      record.features = features_record(features, substituted);
      return record;
    } catch (const sampler::SamplingError& e) {
      if (e.kind() == sampler::SamplingError::Kind::NoEligibleGoal) throw;
      // No eligible start for this goal: resample.
    } catch (const mapgraph::RoutingError&) {
    } catch (const relations::DegenerateRouteError&) {
    } catch (const sampler::UnnameableEntityError&) {
    }
  }
  return std::nullopt;
}

}  // namespace

GenerationResult generate_dataset(const MapBundle& bundle, const GenerationConfig& config) {
  const bool cfg_mode = config.mode != Mode::Dummy;
  std::optional<TemplatePool> pool;
  if (cfg_mode) {
    if (!config.templates) {
      throw GenerationError("mode '" + to_string(config.mode) + "' requires a template set");
    }
    std::vector<std::uint32_t> members;
    switch (config.mode) {
      case Mode::CfgAllocentric:
        members = grammar::filter_by_style(*config.templates, grammar::StyleFilter::Allocentric);
        break;
      case Mode::CfgEgocentric:
        members = grammar::filter_by_style(*config.templates, grammar::StyleFilter::Egocentric);
        break;
      case Mode::CfgMinimal:
        members = grammar::minimal_cover(*config.templates);
        break;
      default:
        members.resize(config.templates->size());
        for (std::uint32_t i = 0; i < members.size(); ++i) members[i] = i;
        break;
    }
    if (members.empty()) {
      throw GenerationError("empty template pool for mode '" + to_string(config.mode) +
                            "': the grammar yields no usable templates");
    }
    pool.emplace(*config.templates, std::move(members));
  }

  IdentityRewriter identity;
  Rewriter* rewriter = config.rewriter ? config.rewriter : &identity;
  std::mutex rewriter_mutex;

  RecordContext ctx{bundle,
                    config,
                    pool ? &*pool : nullptr,
                    rewriter,
                    rewriter->thread_safe() ? nullptr : &rewriter_mutex,
                    cfg_mode ? config.templates->registry().required_mask() : 0,
                    0};
  if (cfg_mode) {
    const int ep = config.templates->registry().index_of("END_POINT");
    if (ep >= 0) ctx.end_point_mask = 1u << ep;
  }

  std::vector<std::optional<InstructionRecord>> produced(config.n);
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1 || config.n <= 1) {
    for (std::uint64_t i = 0; i < config.n; ++i) produced[i] = make_record(ctx, i);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= config.n) break;
        try {
          produced[i] = make_record(ctx, i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    };
    std::vector<std::thread> threads;
    const int spawn = static_cast<int>(std::min<std::uint64_t>(jobs, config.n));
    threads.reserve(static_cast<std::size_t>(spawn));
    for (int t = 0; t < spawn; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  GenerationResult result;
  result.pool_size = pool ? pool->size() : 0;
  for (auto& rec : produced) {
    if (rec) {
      result.records.push_back(std::move(*rec));
    } else {
      ++result.misses;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Grounding verification

namespace {

const Entity* entity_at(const MapBundle& bundle, const geo::GeoPoint& p) {
  for (const auto& hit : bundle.entity_index().query(p, 0.01)) {
    const Entity& e = bundle.entities()[hit.index];
    if (e.centroid == p) return &e;
  }
  return nullptr;
}

std::optional<mapgraph::Route> rebuild_route(const MapBundle& bundle,
                                             const std::vector<geo::GeoPoint>& polyline) {
  mapgraph::Route route;
  const auto& g = bundle.graph();
  for (const auto& p : polyline) {
    std::optional<std::uint32_t> node;
    for (const auto& hit : bundle.node_index().query(p, 0.01)) {
      if (g.node_point(hit.index) == p) {
        node = hit.index;
        break;
      }
    }
    if (!node) return std::nullopt;
    route.nodes.push_back(*node);
    route.polyline.push_back(g.node_point(*node));
  }
  if (route.nodes.empty()) return std::nullopt;
  route.total_length_m = geo::polyline_length_m(route.polyline);
  route.start_snap = route.polyline.front();
  route.end_snap = route.polyline.back();
  return route;
}

}  // namespace

GroundingReport verify_grounding(const InstructionRecord& record, const MapBundle& bundle,
                                 const grammar::TemplateSet& templates,
                                 const sampler::SamplerConfig& config) {
  if (!record.template_id) {
    throw UnknownTemplateError("record '" + record.id +
                               "' carries no template id; dummy and prompt records are not "
                               "mechanically verifiable");
  }
  const auto idx = templates.find_by_id(*record.template_id);
  if (idx < 0) {
    throw UnknownTemplateError("template id of record '" + record.id +
                               "' is not in the enumerated template set");
  }
  const grammar::Template& tmpl = templates.at(static_cast<std::size_t>(idx));

  GroundingReport report;
  auto fail = [&](const std::string& slot, const std::string& expected, const std::string& actual) {
    report.diffs.push_back({slot, expected, actual});
  };

  const Entity* goal = entity_at(bundle, record.goal);
  const Entity* start = entity_at(bundle, record.start);
  if (!goal || !start) {
    report.message = "start/goal coordinates do not match any entity centroid";
    return report;
  }
  auto route = rebuild_route(bundle, record.route);
  if (!route) {
    report.message = "route polyline does not match graph nodes";
    return report;
  }

  sampler::PathSample sample;
  sample.start = start;
  sample.goal = goal;
  sample.route = std::move(*route);
  sample.seed = record.seed;

  sampler::LandmarkSet landmarks;
  auto lookup_all = [&](const std::vector<std::string>& ids,
                        std::vector<const Entity*>& out) {
    for (const auto& id : ids) {
      const Entity* e = bundle.entity(id);
      if (!e) return false;
      out.push_back(e);
    }
    return true;
  };
  for (const auto& lm : record.landmarks.near) {
    sampler::Landmark rebuilt;
    if (!lookup_all(lm.ids, rebuilt.members) || rebuilt.members.empty()) {
      report.message = "near landmark references an unknown entity id";
      return report;
    }
    rebuilt.type_tag = sampler::type_surface(*rebuilt.members.front()).value_or("");
    landmarks.near.push_back(std::move(rebuilt));
  }
  for (const auto& lm : record.landmarks.main) {
    std::vector<const Entity*> members;
    if (!lookup_all(lm.ids, members) || members.size() != 1) {
      report.message = "main pivot references an unknown entity id";
      return report;
    }
    landmarks.main_pivots.push_back(members.front());
  }
  if (record.landmarks.beyond) {
    std::vector<const Entity*> members;
    if (!lookup_all(record.landmarks.beyond->ids, members) || members.size() != 1) {
      report.message = "beyond landmark references an unknown entity id";
      return report;
    }
    landmarks.beyond = members.front();
  }

  std::map<std::string, std::string> slots;
  std::string expected;
  std::vector<Span> spans;
  try {
    const auto features = relations::compute_features(bundle, sample, landmarks);
    slots = resolve_slots(templates.registry(), sample, landmarks, features, config);
    expected = instantiate_with_spans(templates, tmpl, slots, &spans);
  } catch (const std::exception& e) {
    report.message = std::string("recomputation failed: ") + e.what();
    return report;
  }

  // Per-slot comparison of substituted values.
  for (const auto& name : templates.placeholder_names(tmpl)) {
    auto recomputed = slots.find(name);
    std::string stored;
    bool have_stored = false;
    if (record.features) {
      auto it = record.features->slots.find(name);
      if (it != record.features->slots.end()) {
        stored = it->second;
        have_stored = true;
      }
    }
    if (recomputed == slots.end()) {
      fail(name, "<unavailable>", have_stored ? stored : "<missing>");
    } else if (!have_stored) {
      fail(name, recomputed->second, "<missing>");
    } else if (recomputed->second != stored) {
      fail(name, recomputed->second, stored);
    }
  }

  // Full-text comparison, attributing the first divergence to a slot span.
  if (expected != record.instruction) {
    std::size_t i = 0;
    const std::size_t limit = std::min(expected.size(), record.instruction.size());
    while (i < limit && expected[i] == record.instruction[i]) ++i;
    std::string slot = "instruction";
    for (const auto& span : spans) {
      if (i >= span.begin && i <= span.end) {
        slot = span.slot;
        break;
      }
    }
    fail(slot, expected, record.instruction);
  }

  report.pass = report.diffs.empty() && report.message.empty();
  if (!report.pass && report.message.empty()) {
    report.message = std::to_string(report.diffs.size()) + " slot(s) diverged";
  }
  return report;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::string spaced;
  spaced.reserve(text.size() * 2);
  for (char c : text) {
    const bool punct = c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' ||
                       c == '(' || c == ')' || c == '"';
    if (punct) {
      spaced.push_back(' ');
      spaced.push_back(c);
      spaced.push_back(' ');
    } else {
      spaced.push_back(c);
    }
  }
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < spaced.size()) {
    while (i < spaced.size() && std::isspace(static_cast<unsigned char>(spaced[i]))) ++i;
    const std::size_t start = i;
    while (i < spaced.size() && !std::isspace(static_cast<unsigned char>(spaced[i]))) ++i;
    if (i > start) tokens.push_back(spaced.substr(start, i - start));
  }
  return tokens;
}

int entity_mentions(const InstructionRecord& record) {
  if (!record.features) return 0;
  static const std::array<const char*, 5> entity_slots = {
      "END_POINT", "MAIN_PIVOT", "MAIN_NEAR_PIVOT", "NEAR_PIVOT", "BEYOND_PIVOT"};
  int count = 0;
  for (const char* slot : entity_slots) {
    if (record.features->slots.count(slot)) ++count;
  }
  return count;
}

}  // namespace navsynth::generator
