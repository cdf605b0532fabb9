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

#include "navsynth/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace navsynth::grammar {

// ---------------------------------------------------------------------------
// Placeholder registry

void PlaceholderRegistry::add(PlaceholderInfo info) {
  if (entries_.size() >= 32) {
    throw std::logic_error("placeholder registry limited to 32 entries");
  }
  if (lookup_.count(info.name)) {
    throw std::logic_error("placeholder registered twice: " + info.name);
  }
  const auto index = static_cast<std::uint32_t>(entries_.size());
  lookup_[info.name] = index;
  const std::uint32_t bit = 1u << index;
  if (info.required_when_available) required_mask_ |= bit;
  if (info.style == StyleClass::Allocentric) allocentric_mask_ |= bit;
  if (info.style == StyleClass::Egocentric) egocentric_mask_ |= bit;
  entries_.push_back(std::move(info));
}

const PlaceholderInfo* PlaceholderRegistry::find(std::string_view name) const {
  const int i = index_of(name);
  return i < 0 ? nullptr : &entries_[static_cast<std::size_t>(i)];
}

int PlaceholderRegistry::index_of(std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  return it == lookup_.end() ? -1 : static_cast<int>(it->second);
}

std::uint32_t PlaceholderRegistry::style_mask(StyleClass c) const {
  switch (c) {
    case StyleClass::Allocentric: return allocentric_mask_;
    case StyleClass::Egocentric: return egocentric_mask_;
    case StyleClass::Neutral:
      return ~(allocentric_mask_ | egocentric_mask_) &
             ((entries_.size() == 32) ? 0xFFFFFFFFu : ((1u << entries_.size()) - 1));
  }
  return 0;
}

std::uint32_t PlaceholderRegistry::mask_of(const std::set<std::string>& names) const {
  std::uint32_t mask = 0;
  for (const auto& n : names) {
    const int i = index_of(n);
    if (i < 0) throw std::invalid_argument("unknown placeholder: " + n);
    mask |= 1u << i;
  }
  return mask;
}

std::set<std::string> PlaceholderRegistry::names_of(std::uint32_t mask) const {
  std::set<std::string> names;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (mask & (1u << i)) names.insert(entries_[i].name);
  }
  return names;
}

const PlaceholderRegistry& PlaceholderRegistry::standard() {
  static const PlaceholderRegistry reg = [] {
    PlaceholderRegistry r;
    r.add({"END_POINT", StyleClass::Neutral, FeatureSlot::Goal, true});
    r.add({"MAIN_PIVOT", StyleClass::Neutral, FeatureSlot::MainPivot, true});
    r.add({"MAIN_NEAR_PIVOT", StyleClass::Neutral, FeatureSlot::MainNearPivot, false});
    r.add({"NEAR_PIVOT", StyleClass::Neutral, FeatureSlot::NearPivot, true});
    r.add({"BEYOND_PIVOT", StyleClass::Neutral, FeatureSlot::BeyondPivot, true});
    r.add({"CARDINAL_DIRECTION", StyleClass::Allocentric, FeatureSlot::CardinalFromMain, false});
    r.add({"CARDINAL_FROM_NEAR", StyleClass::Allocentric, FeatureSlot::CardinalFromNear, false});
    r.add({"INTERSECTIONS", StyleClass::Neutral, FeatureSlot::IntersectionCount, false});
    r.add({"BLOCKS", StyleClass::Neutral, FeatureSlot::BlockCount, false});
    r.add({"GOAL_POSITION_EGO", StyleClass::Egocentric, FeatureSlot::BlockPositionEgo, false});
    r.add({"GOAL_POSITION_ALLO", StyleClass::Allocentric, FeatureSlot::BlockPositionAllo, false});
    r.add({"EGO_SIDE", StyleClass::Egocentric, FeatureSlot::MainPivotSide, false});
    return r;
  }();
  return reg;
}

// ---------------------------------------------------------------------------
// Symbol table

std::uint32_t SymbolTable::intern(const std::string& text) {
  auto it = lookup_.find(text);
  if (it != lookup_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(texts_.size());
  texts_.push_back(text);
  lookup_[text] = id;
  return id;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

bool is_all_caps_token(std::string_view s) {
  if (s.empty()) return false;
  if (!(s[0] >= 'A' && s[0] <= 'Z')) return false;
  for (char c : s) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    if (!ok) return false;
  }
  return true;
}

struct RawToken {
  bool quoted;
  std::string text;
};

struct RawProduction {
  std::string name;
  int line;
  std::vector<std::vector<RawToken>> alternatives;
};

}  // namespace

class GrammarParser {
 public:
  GrammarParser(const PlaceholderRegistry& registry, std::string source)
      : registry_(registry), source_(std::move(source)) {}

  Grammar parse(std::istream& in) {
    read_raw(in);
    if (raw_.empty()) {
      throw GrammarError(GrammarError::Kind::Syntax, 0, source_ + ": grammar defines no productions");
    }
    resolve();
    check_acyclic();
    grammar_.registry_ = &registry_;
    return std::move(grammar_);
  }

 private:
  [[noreturn]] void fail(GrammarError::Kind kind, int line, const std::string& msg) {
    throw GrammarError(kind, line, source_ + ":" + std::to_string(line) + ": " + msg);
  }

  static std::string strip_comment(const std::string& line) {
    bool in_quote = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_quote = !in_quote;
      if (c == '#' && !in_quote) return line.substr(0, i);
    }
    return line;
  }

  std::vector<RawToken> lex_alternative(const std::string& text, int line) {
    std::vector<RawToken> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) {
        ++i;
        continue;
      }
      if (text[i] == '"') {
        std::string value;
        ++i;
        bool closed = false;
        while (i < text.size()) {
          if (text[i] == '\\' && i + 1 < text.size() && (text[i + 1] == '"' || text[i + 1] == '\\')) {
            value.push_back(text[i + 1]);
            i += 2;
          } else if (text[i] == '"') {
            ++i;
            closed = true;
            break;
          } else {
            value.push_back(text[i]);
            ++i;
          }
        }
        if (!closed) fail(GrammarError::Kind::Syntax, line, "unterminated string literal");
        if (value.empty()) fail(GrammarError::Kind::Syntax, line, "empty string literal");
        tokens.push_back({true, value});
      } else {
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) &&
               text[i] != '"') {
          ++i;
        }
        const std::string word = text.substr(start, i - start);
        if (!is_identifier(word)) {
          fail(GrammarError::Kind::Syntax, line, "malformed symbol '" + word + "'");
        }
        if (std::islower(static_cast<unsigned char>(word[0]))) {
          fail(GrammarError::Kind::Syntax, line,
               "bare symbol '" + word + "' starts lowercase; quote literals as \"" + word + "\"");
        }
        tokens.push_back({false, word});
      }
    }
    return tokens;
  }

  void append_alternatives(RawProduction& prod, const std::string& rhs, int line) {
    std::string current;
    bool in_quote = false;
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      const char c = rhs[i];
      if (c == '"' && (i == 0 || rhs[i - 1] != '\\')) in_quote = !in_quote;
      if (c == '|' && !in_quote) {
        parts.push_back(current);
        current.clear();
      } else {
        current.push_back(c);
      }
    }
    parts.push_back(current);
    for (const auto& part : parts) {
      auto tokens = lex_alternative(part, line);
      if (tokens.empty()) {
        fail(GrammarError::Kind::Syntax, line, "empty alternative (finite grammars have no epsilon)");
      }
      prod.alternatives.push_back(std::move(tokens));
    }
  }

  void read_raw(std::istream& in) {
    std::string line_text;
    int line = 0;
    while (std::getline(in, line_text)) {
      ++line;
      std::string text = strip_comment(line_text);
      const auto first = text.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (text[first] == '|') {
        if (raw_.empty()) {
          fail(GrammarError::Kind::Syntax, line, "continuation line before any production");
        }
        append_alternatives(raw_.back(), text.substr(first + 1), line);
        continue;
      }
      const auto arrow = text.find("->");
      if (arrow == std::string::npos) {
        fail(GrammarError::Kind::Syntax, line, "expected 'Name -> alternatives'");
      }
      std::string name = text.substr(0, arrow);
      name.erase(0, name.find_first_not_of(" \t"));
      name.erase(name.find_last_not_of(" \t\r") + 1);
      if (!is_identifier(name) || !std::isupper(static_cast<unsigned char>(name[0]))) {
        fail(GrammarError::Kind::Syntax, line,
             "production name '" + name + "' must be an identifier starting uppercase");
      }
      if (name_index_.count(name)) {
        fail(GrammarError::Kind::Syntax, line, "production '" + name + "' redefined");
      }
      name_index_[name] = raw_.size();
      RawProduction prod;
      prod.name = name;
      prod.line = line;
      append_alternatives(prod, text.substr(arrow + 2), line);
      raw_.push_back(std::move(prod));
    }
  }

  void resolve() {
    grammar_.productions_.resize(raw_.size());
    for (std::size_t pi = 0; pi < raw_.size(); ++pi) {
      Production& prod = grammar_.productions_[pi];
      prod.name = raw_[pi].name;
      prod.line = raw_[pi].line;
      for (const auto& alt : raw_[pi].alternatives) {
        std::vector<Symbol> symbols;
        for (const auto& tok : alt) {
          if (tok.quoted) {
            symbols.push_back({Symbol::Kind::Literal, grammar_.literals_.intern(tok.text)});
            continue;
          }
          auto def = name_index_.find(tok.text);
          if (def != name_index_.end()) {
            symbols.push_back({Symbol::Kind::Nonterminal, static_cast<std::uint32_t>(def->second)});
            continue;
          }
          if (is_all_caps_token(tok.text)) {
            const int idx = registry_.index_of(tok.text);
            if (idx < 0) {
              fail(GrammarError::Kind::UnknownPlaceholder, raw_[pi].line,
                   "unknown placeholder '" + tok.text + "'");
            }
            symbols.push_back({Symbol::Kind::Placeholder, static_cast<std::uint32_t>(idx)});
            continue;
          }
          fail(GrammarError::Kind::UndefinedNonterminal, raw_[pi].line,
               "undefined nonterminal '" + tok.text + "'");
        }
        prod.alternatives.push_back(std::move(symbols));
      }
    }
  }

  void check_acyclic() {
    enum class Color { White, Gray, Black };
    std::vector<Color> color(grammar_.productions_.size(), Color::White);
    // Iterative DFS; a gray-to-gray edge is a cycle.
    struct Frame {
      std::uint32_t node;
      std::size_t alt = 0, sym = 0;
    };
    for (std::uint32_t start = 0; start < grammar_.productions_.size(); ++start) {
      if (color[start] != Color::White) continue;
      std::vector<Frame> stack{{start}};
      color[start] = Color::Gray;
      while (!stack.empty()) {
        Frame& f = stack.back();
        const Production& prod = grammar_.productions_[f.node];
        bool descended = false;
        while (f.alt < prod.alternatives.size()) {
          const auto& alt = prod.alternatives[f.alt];
          while (f.sym < alt.size()) {
            const Symbol& s = alt[f.sym++];
            if (s.kind != Symbol::Kind::Nonterminal) continue;
            if (color[s.id] == Color::Gray) {
              fail(GrammarError::Kind::Recursion, grammar_.productions_[s.id].line,
                   "recursion detected through nonterminal '" +
                       grammar_.productions_[s.id].name + "'");
            }
            if (color[s.id] == Color::White) {
              color[s.id] = Color::Gray;
              stack.push_back({s.id});
              descended = true;
              break;
            }
          }
          if (descended) break;
          ++f.alt;
          f.sym = 0;
        }
        if (!descended && f.alt >= prod.alternatives.size()) {
          color[f.node] = Color::Black;
          stack.pop_back();
        }
      }
    }
  }

  const PlaceholderRegistry& registry_;
  std::string source_;
  std::vector<RawProduction> raw_;
  std::unordered_map<std::string, std::size_t> name_index_;
  Grammar grammar_;
};

Grammar Grammar::parse_file(const std::string& path, const PlaceholderRegistry& registry) {
  std::ifstream in(path);
  if (!in) {
    throw GrammarError(GrammarError::Kind::Syntax, 0, path + ": cannot open grammar file");
  }
  return GrammarParser(registry, path).parse(in);
}

Grammar Grammar::parse_string(const std::string& text, const PlaceholderRegistry& registry,
                              const std::string& source_name) {
  std::istringstream in(text);
  return GrammarParser(registry, source_name).parse(in);
}

// ---------------------------------------------------------------------------
// Counting and enumeration

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  const __uint128_t p = static_cast<__uint128_t>(a) * b;
  return p > UINT64_MAX ? UINT64_MAX : static_cast<std::uint64_t>(p);
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s < a ? UINT64_MAX : s;
}

std::uint64_t count_nonterminal(const Grammar& g, std::uint32_t index,
                                std::vector<std::uint64_t>& memo) {
  if (memo[index] != 0) return memo[index];
  std::uint64_t total = 0;
  for (const auto& alt : g.production(index).alternatives) {
    std::uint64_t product = 1;
    for (const auto& sym : alt) {
      if (sym.kind == Symbol::Kind::Nonterminal) {
        product = saturating_mul(product, count_nonterminal(g, sym.id, memo));
      }
    }
    total = saturating_add(total, product);
  }
  memo[index] = total;
  return total;
}

std::uint64_t fnv1a_update(std::uint64_t h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t template_hash(const std::vector<Token>& tokens, const SymbolTable& literals,
                            const PlaceholderRegistry& registry) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const Token& t : tokens) {
    const unsigned char tag = t.placeholder ? 0x02 : 0x01;
    h = fnv1a_update(h, &tag, 1);
    const std::string& text = t.placeholder ? registry.at(t.id).name : literals.text(t.id);
    h = fnv1a_update(h, text.data(), text.size());
    const unsigned char sep = 0x00;
    h = fnv1a_update(h, &sep, 1);
  }
  return h;
}

TemplateStyle style_from_mask(std::uint32_t mask, const PlaceholderRegistry& registry) {
  const bool allo = (mask & registry.style_mask(StyleClass::Allocentric)) != 0;
  const bool ego = (mask & registry.style_mask(StyleClass::Egocentric)) != 0;
  if (allo && ego) return TemplateStyle::Mixed;
  if (allo) return TemplateStyle::Allocentric;
  if (ego) return TemplateStyle::Egocentric;
  return TemplateStyle::Neutral;
}

}  // namespace

std::uint64_t Grammar::count_templates() const {
  std::vector<std::uint64_t> memo(productions_.size(), 0);
  return count_nonterminal(*this, 0, memo);
}

TemplateSet enumerate_templates(const Grammar& g, std::uint64_t cap) {
  const std::uint64_t total = g.count_templates();
  if (total > cap) {
    throw GrammarError(GrammarError::Kind::Capacity, 0,
                       "grammar expands to " + std::to_string(total) +
                           " templates, above the cap of " + std::to_string(cap));
  }

  // Memoized bottom-up expansion. Order within a nonterminal: alternatives
  // in file order, and within an alternative the leftmost symbol varies
  // slowest, which equals depth-first traversal order.
  std::vector<std::vector<std::vector<Token>>> memo(g.productions().size());
  std::vector<bool> done(g.productions().size(), false);

  auto expand = [&](auto&& self, std::uint32_t index) -> const std::vector<std::vector<Token>>& {
    if (done[index]) return memo[index];
    std::vector<std::vector<Token>> result;
    for (const auto& alt : g.production(index).alternatives) {
      std::vector<std::vector<Token>> partial{{}};
      for (const Symbol& sym : alt) {
        if (sym.kind == Symbol::Kind::Nonterminal) {
          const auto& sub = self(self, sym.id);
          std::vector<std::vector<Token>> next;
          next.reserve(partial.size() * sub.size());
          for (const auto& p : partial) {
            for (const auto& s : sub) {
              std::vector<Token> combined = p;
              combined.insert(combined.end(), s.begin(), s.end());
              next.push_back(std::move(combined));
            }
          }
          partial = std::move(next);
        } else {
          const Token tok{sym.kind == Symbol::Kind::Placeholder, sym.id};
          for (auto& p : partial) p.push_back(tok);
        }
      }
      for (auto& p : partial) result.push_back(std::move(p));
    }
    memo[index] = std::move(result);
    done[index] = true;
    return memo[index];
  };

  TemplateSet set;
  set.literals_ = g.literals();
  set.registry_ = &g.registry();
  expand(expand, 0);
  std::vector<std::vector<Token>> expanded = std::move(memo[0]);
  memo.clear();
  set.templates_.reserve(expanded.size());
  for (auto& tokens : expanded) {
    Template t;
    t.tokens = std::move(tokens);
    for (const Token& tok : t.tokens) {
      if (tok.placeholder) t.placeholder_mask |= 1u << tok.id;
    }
    t.style = style_from_mask(t.placeholder_mask, g.registry());
    t.id = template_hash(t.tokens, set.literals_, g.registry());
    const auto idx = static_cast<std::uint32_t>(set.templates_.size());
    auto [existing, inserted] = set.by_id_.emplace(t.id, idx);
    if (!inserted && set.templates_[existing->second].tokens != t.tokens) {
      // Identical token sequences may repeat (the grammar can derive the
      // same template twice); different sequences with one hash cannot.
      throw std::logic_error("template id hash collision during enumeration");
    }
    set.templates_.push_back(std::move(t));
  }
  return set;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (w.empty()) continue;
    const char c = w.front();
    const bool closing = c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':';
    if (!out.empty() && !closing) out.push_back(' ');
    out += w;
  }
  return out;
}

std::string TemplateSet::text(const Template& t) const {
  std::vector<std::string> words;
  words.reserve(t.tokens.size());
  for (const Token& tok : t.tokens) {
    words.push_back(tok.placeholder ? registry_->at(tok.id).name : literals_.text(tok.id));
  }
  return join_words(words);
}

std::set<std::string> TemplateSet::placeholder_names(const Template& t) const {
  return registry_->names_of(t.placeholder_mask);
}

std::int64_t TemplateSet::find_by_id(std::uint64_t id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

std::vector<std::uint32_t> compatible_templates(const TemplateSet& set,
                                                const std::set<std::string>& available,
                                                bool relax_required) {
  const PlaceholderRegistry& reg = set.registry();
  const std::uint32_t avail = reg.mask_of(available);
  std::uint32_t required = relax_required ? 0 : (reg.required_mask() & avail);
  const int end_point = reg.index_of("END_POINT");
  if (end_point >= 0) required |= 1u << end_point;

  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < set.size(); ++i) {
    const std::uint32_t mask = set.at(i).placeholder_mask;
    if ((mask & ~avail) != 0) continue;      // uses something unavailable
    if ((required & ~mask) != 0) continue;   // misses a required mention
    out.push_back(i);
  }
  return out;
}

std::vector<std::uint32_t> minimal_cover(const TemplateSet& set) {
  // Feature = (placeholder index, template style); 32 placeholders x 4 styles.
  auto features_of = [](const Template& t) {
    std::uint64_t bits[2] = {0, 0};
    const auto style = static_cast<std::uint32_t>(t.style);
    for (std::uint32_t p = 0; p < 32; ++p) {
      if (t.placeholder_mask & (1u << p)) {
        const std::uint32_t f = p * 4 + style;
        bits[f / 64] |= 1ull << (f % 64);
      }
    }
    return std::pair{bits[0], bits[1]};
  };

  std::uint64_t universe0 = 0, universe1 = 0;
  for (const auto& t : set.templates()) {
    const auto [f0, f1] = features_of(t);
    universe0 |= f0;
    universe1 |= f1;
  }

  std::vector<std::uint32_t> kept;
  std::uint64_t covered0 = 0, covered1 = 0;
  for (std::uint32_t i = 0; i < set.size(); ++i) {
    if (covered0 == universe0 && covered1 == universe1) break;
    const auto [f0, f1] = features_of(set.at(i));
    if ((f0 & ~covered0) != 0 || (f1 & ~covered1) != 0) {
      kept.push_back(i);
      covered0 |= f0;
      covered1 |= f1;
    }
  }
  return kept;
}

std::vector<std::uint32_t> filter_by_style(const TemplateSet& set, StyleFilter filter) {
  const PlaceholderRegistry& reg = set.registry();
  const std::uint32_t allo = reg.style_mask(StyleClass::Allocentric);
  const std::uint32_t ego = reg.style_mask(StyleClass::Egocentric);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < set.size(); ++i) {
    const std::uint32_t mask = set.at(i).placeholder_mask;
    if (filter == StyleFilter::Allocentric) {
      if ((mask & ego) == 0) out.push_back(i);
    } else {
      if ((mask & ego) != 0 && (mask & allo) == 0) out.push_back(i);
    }
  }
  return out;
}

std::string to_string(TemplateStyle s) {
  switch (s) {
    case TemplateStyle::Allocentric: return "allocentric";
    case TemplateStyle::Egocentric: return "egocentric";
    case TemplateStyle::Mixed: return "mixed";
    case TemplateStyle::Neutral: return "neutral";
  }
  return "neutral";
}

std::string to_string(StyleClass c) {
  switch (c) {
    case StyleClass::Allocentric: return "allocentric";
    case StyleClass::Egocentric: return "egocentric";
    case StyleClass::Neutral: return "neutral";
  }
  return "neutral";
}

}  // namespace navsynth::grammar
