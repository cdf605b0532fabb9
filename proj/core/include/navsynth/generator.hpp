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

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "navsynth/grammar.hpp"
#include "navsynth/relations.hpp"
#include "navsynth/sampler.hpp"

namespace navsynth::generator {

enum class Mode { Cfg, CfgAllocentric, CfgEgocentric, CfgMinimal, Dummy, Prompt };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

/// Serialized view of one landmark: member entity ids plus the surface form
/// substituted into the instruction.
struct LandmarkRecord {
  std::vector<std::string> ids;
  std::string surface;
  std::string form;  // proper | indefinite | grouped
  std::string type;  // surface type; empty for proper-only names
};

struct LandmarksRecord {
  std::vector<LandmarkRecord> near;
  std::vector<LandmarkRecord> main;
  std::optional<LandmarkRecord> beyond;
};

struct FeaturesRecord {
  std::string cardinal_start_to_goal;
  std::map<std::string, std::string> cardinal_to_goal;
  std::map<std::string, std::string> ego_side;
  int n_intersections = 0;
  int n_blocks = 0;
  std::string block_position_ego;
  std::optional<std::string> block_position_allo;
  // Placeholder name -> substituted surface, for the template's placeholders.
  std::map<std::string, std::string> slots;
};

/// One dataset line. Round-trips losslessly through the JSONL schema.
struct InstructionRecord {
  std::string id;
  std::string mode;
  std::string instruction;
  geo::GeoPoint start{0.0, 0.0};
  geo::GeoPoint goal{0.0, 0.0};
  std::vector<geo::GeoPoint> route;
  std::optional<std::uint64_t> template_id;  // absent for dummy/prompt records
  LandmarksRecord landmarks;
  std::optional<FeaturesRecord> features;  // absent for dummy records
  std::uint64_t seed = 0;
};

/// JSONL serialization; coordinates as [lon, lat], template ids as 16-digit
/// hex strings. Field order is fixed so identical records serialize to
/// identical bytes.
std::string to_jsonl(const InstructionRecord& record);
InstructionRecord record_from_jsonl(const std::string& line);

// ---------------------------------------------------------------------------
// Rewriter interface (prompt mode)

class Rewriter {
 public:
  virtual ~Rewriter() = default;
  virtual std::string rewrite(const std::string& prompt) = 0;
  /// Implementations that are not safe for concurrent calls return false
  /// and the generation driver serializes them.
  virtual bool thread_safe() const { return true; }
};

/// Returns its input verbatim; the offline default.
class IdentityRewriter final : public Rewriter {
 public:
  std::string rewrite(const std::string& prompt) override { return prompt; }
};

/// Plays back prompt -> text pairs recorded in a JSONL file
/// ({"prompt": str, "text": str} per line). Unknown prompts are an error.
class FixtureRewriter final : public Rewriter {
 public:
  explicit FixtureRewriter(const std::string& path);
  std::string rewrite(const std::string& prompt) override;

 private:
  std::map<std::string, std::string> responses_;
  std::string path_;
};

/// POSTs {"prompt": str} to an HTTP endpoint and expects {"text": str}.
/// A bearer token is read from the NAVSYNTH_REWRITER_TOKEN environment
/// variable when present.
class HttpRewriter final : public Rewriter {
 public:
  explicit HttpRewriter(const std::string& url);
  std::string rewrite(const std::string& prompt) override;
  bool thread_safe() const override { return false; }

 private:
  std::string host_;
  std::string path_;
};

/// "identity", "fixture:PATH", or "http:URL" / a bare http(s) URL.
std::unique_ptr<Rewriter> make_rewriter(const std::string& spec);

// ---------------------------------------------------------------------------
// Instruction assembly

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingFeatureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownTemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Surface values for every placeholder fillable in this scenario, keyed by
/// placeholder name. Cardinals render lowercase, counts as number words.
std::map<std::string, std::string> resolve_slots(const grammar::PlaceholderRegistry& registry,
                                                 const sampler::PathSample& sample,
                                                 const sampler::LandmarkSet& landmarks,
                                                 const relations::SpatialFeatures& features,
                                                 const sampler::SamplerConfig& config = {});

/// Substitutes every placeholder of t from the slot map and joins tokens
/// with single spaces (none before closing punctuation). Throws
/// MissingFeatureError when the template mentions an unavailable slot.
std::string instantiate(const grammar::TemplateSet& set, const grammar::Template& t,
                        const std::map<std::string, std::string>& slots);

/// The fixed list of 31 location-free meeting phrases used by dummy mode.
std::span<const std::string> dummy_phrases();

/// Uniform draw from dummy_phrases().
const std::string& dummy_instruction(rng::Engine& rng);

/// Rephrasing request sent to a rewriter: fixed preamble plus the
/// instruction.
std::string build_prompt(const std::string& instruction);

/// True if the text still contains an unresolved placeholder-like token
/// (a run of four or more capitals/underscores).
bool has_placeholder_residue(const std::string& text);

// ---------------------------------------------------------------------------
// Dataset generation

struct GenerationConfig {
  Mode mode = Mode::Cfg;
  std::uint64_t seed = 0;
  std::uint64_t n = 0;
  int retries = 50;  // resample attempts per record before counting a miss
  int jobs = 1;
  const grammar::TemplateSet* templates = nullptr;  // required for CFG/prompt modes
  Rewriter* rewriter = nullptr;                     // prompt mode; identity when null
  sampler::SamplerConfig sampler;
};

struct GenerationResult {
  std::vector<InstructionRecord> records;  // in record-index order
  std::uint64_t misses = 0;
  std::uint64_t pool_size = 0;  // template pool size; 0 for dummy mode
};

/// Generates n records. Record i depends only on (bundle, seed, i, mode), so
/// results are identical for any job count. Exhausted retry budgets reduce
/// the record count and are reported as misses.
GenerationResult generate_dataset(const mapgraph::MapBundle& bundle,
                                  const GenerationConfig& config);

// ---------------------------------------------------------------------------
// Grounding verification

struct SlotDiff {
  std::string slot;  // placeholder name, or "instruction" for text-level diffs
  std::string expected;
  std::string actual;
};

struct GroundingReport {
  bool pass = false;
  std::vector<SlotDiff> diffs;
  std::string message;
};

/// Recomputes every spatial relation and surface form of a CFG-mode record
/// from its coordinates and asserts the substituted values match. Records
/// without a template id (dummy, prompt) raise UnknownTemplateError.
GroundingReport verify_grounding(const InstructionRecord& record,
                                 const mapgraph::MapBundle& bundle,
                                 const grammar::TemplateSet& templates,
                                 const sampler::SamplerConfig& config = {});

/// Whitespace tokens after separating punctuation, the tokenizer used for
/// dataset statistics.
std::vector<std::string> tokenize(const std::string& text);

/// Number of distinct entity-valued placeholders substituted into a record.
int entity_mentions(const InstructionRecord& record);

}  // namespace navsynth::generator
