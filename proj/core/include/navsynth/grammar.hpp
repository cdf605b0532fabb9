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
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace navsynth::grammar {

/// Style class of a placeholder: allocentric relations are observer
/// independent (cardinal directions), egocentric ones depend on the
/// direction of travel (left/right), everything else is neutral.
enum class StyleClass { Allocentric, Egocentric, Neutral };

/// Style of a whole template, derived from its placeholder set.
enum class TemplateStyle { Allocentric, Egocentric, Mixed, Neutral };

/// Which computed value fills a placeholder at instantiation time.
enum class FeatureSlot {
  Goal,
  MainPivot,
  MainNearPivot,
  NearPivot,
  BeyondPivot,
  CardinalFromMain,
  CardinalFromNear,
  IntersectionCount,
  BlockCount,
  BlockPositionEgo,
  BlockPositionAllo,
  MainPivotSide,
};

struct PlaceholderInfo {
  std::string name;
  StyleClass style = StyleClass::Neutral;
  FeatureSlot slot = FeatureSlot::Goal;
  // When true and the value is available for a sample, a compatible template
  // must mention the placeholder. Landmark categories carry this flag so the
  // chosen template references everything that was found for the path.
  bool required_when_available = false;
};

/// All placeholders a grammar may use. At most 32 entries so placeholder
/// sets fit in a bit mask.
class PlaceholderRegistry {
 public:
  void add(PlaceholderInfo info);

  const PlaceholderInfo* find(std::string_view name) const;
  int index_of(std::string_view name) const;  // -1 when unknown
  const PlaceholderInfo& at(std::size_t index) const { return entries_[index]; }
  std::size_t size() const { return entries_.size(); }

  std::uint32_t required_mask() const { return required_mask_; }
  std::uint32_t style_mask(StyleClass c) const;
  /// Bit mask of the given placeholder names; throws on unknown names.
  std::uint32_t mask_of(const std::set<std::string>& names) const;
  std::set<std::string> names_of(std::uint32_t mask) const;

  /// The built-in placeholder set used by the shipped grammar.
  static const PlaceholderRegistry& standard();

 private:
  std::vector<PlaceholderInfo> entries_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
  std::uint32_t required_mask_ = 0;
  std::uint32_t allocentric_mask_ = 0;
  std::uint32_t egocentric_mask_ = 0;
};

class GrammarError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UndefinedNonterminal, Recursion, UnknownPlaceholder, Capacity };

  GrammarError(Kind kind, int line, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  int line() const { return line_; }  // 1-based; 0 when not line-specific

 private:
  Kind kind_;
  int line_;
};

/// Interned literal strings; template tokens reference them by id.
class SymbolTable {
 public:
  std::uint32_t intern(const std::string& text);
  const std::string& text(std::uint32_t id) const { return texts_[id]; }
  std::size_t size() const { return texts_.size(); }

 private:
  std::vector<std::string> texts_;
  std::unordered_map<std::string, std::uint32_t> lookup_;
};

struct Symbol {
  enum class Kind { Literal, Placeholder, Nonterminal };
  Kind kind = Kind::Literal;
  std::uint32_t id = 0;  // literal intern id, placeholder index, or production index
};

struct Production {
  std::string name;
  int line = 0;
  std::vector<std::vector<Symbol>> alternatives;  // in file order
};

/// A finite (acyclic) context-free grammar.
///
/// File format: one production per line, `Name -> alt | alt`; continuation
/// lines begin with `|`. Alternatives are whitespace-separated symbols:
/// double-quoted strings are literal terminals, bare tokens defined on some
/// left-hand side are nonterminals, remaining ALL_CAPS tokens are registry
/// placeholders. `#` starts a comment. The first production is the start
/// symbol.
class Grammar {
 public:
  static Grammar parse_file(const std::string& path,
                            const PlaceholderRegistry& registry = PlaceholderRegistry::standard());
  static Grammar parse_string(const std::string& text,
                              const PlaceholderRegistry& registry = PlaceholderRegistry::standard(),
                              const std::string& source_name = "<string>");

  const std::vector<Production>& productions() const { return productions_; }
  const Production& production(std::uint32_t index) const { return productions_[index]; }
  const std::string& start_symbol() const { return productions_.front().name; }
  const PlaceholderRegistry& registry() const { return *registry_; }
  const SymbolTable& literals() const { return literals_; }

  /// Exact number of templates the grammar expands to, computed without
  /// materializing them. Saturates at UINT64_MAX on overflow.
  std::uint64_t count_templates() const;

 private:
  friend class GrammarParser;

  std::vector<Production> productions_;
  SymbolTable literals_;
  const PlaceholderRegistry* registry_ = nullptr;
};

struct Token {
  bool placeholder = false;
  std::uint32_t id = 0;  // literal intern id or placeholder index

  friend bool operator==(const Token&, const Token&) = default;
};

struct Template {
  std::vector<Token> tokens;
  std::uint32_t placeholder_mask = 0;
  TemplateStyle style = TemplateStyle::Neutral;
  std::uint64_t id = 0;  // stable hash of the token sequence
};

/// The exhaustive expansion of a grammar. Ordering is depth-first with
/// alternatives in file order, so two enumerations of the same grammar are
/// identical.
class TemplateSet {
 public:
  const std::vector<Template>& templates() const { return templates_; }
  const Template& at(std::size_t i) const { return templates_[i]; }
  std::size_t size() const { return templates_.size(); }

  const SymbolTable& literals() const { return literals_; }
  const PlaceholderRegistry& registry() const { return *registry_; }

  /// Rendered token sequence with placeholders shown by name.
  std::string text(const Template& t) const;
  std::set<std::string> placeholder_names(const Template& t) const;

  /// Index of the template with the given id, or -1.
  std::int64_t find_by_id(std::uint64_t id) const;

 private:
  friend TemplateSet enumerate_templates(const Grammar&, std::uint64_t);

  std::vector<Template> templates_;
  SymbolTable literals_;
  const PlaceholderRegistry* registry_ = nullptr;
  std::unordered_map<std::uint64_t, std::uint32_t> by_id_;
};

inline constexpr std::uint64_t default_template_cap = 10'000'000;

/// Expands every template. Throws GrammarError::Kind::Capacity when the
/// analytic count exceeds the cap.
TemplateSet enumerate_templates(const Grammar& g,
                                std::uint64_t cap = default_template_cap);

/// Indices of templates usable with the given available placeholder values:
/// the template's placeholders must all be available, and every available
/// placeholder marked required (plus END_POINT, always) must be mentioned.
/// With relax_required, only the END_POINT requirement is kept.
std::vector<std::uint32_t> compatible_templates(const TemplateSet& set,
                                                const std::set<std::string>& available,
                                                bool relax_required = false);

/// First-scan greedy cover: a template is kept iff it contributes at least
/// one (placeholder, style) feature not covered by the templates kept
/// before it; the scan stops once every feature of the input is covered.
std::vector<std::uint32_t> minimal_cover(const TemplateSet& set);

enum class StyleFilter { Allocentric, Egocentric };

/// Allocentric keeps templates with no egocentric placeholder; Egocentric
/// keeps templates with at least one egocentric and no allocentric
/// placeholder. Neutral placeholders pass both filters.
std::vector<std::uint32_t> filter_by_style(const TemplateSet& set, StyleFilter filter);

std::string to_string(TemplateStyle s);
std::string to_string(StyleClass c);

/// Joins words with single spaces, omitting the space before tokens that
/// begin with closing punctuation, so "garden" + "." renders "garden.".
std::string join_words(const std::vector<std::string>& words);

}  // namespace navsynth::grammar
