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
#include <set>

#include "navsynth/grammar.hpp"
#include "navsynth/rng.hpp"

using namespace navsynth;
using grammar::Grammar;
using grammar::GrammarError;
using grammar::PlaceholderRegistry;
using grammar::StyleFilter;
using grammar::TemplateSet;
using grammar::TemplateStyle;

namespace {

const std::string shipped_grammar_path = std::string(NAVSYNTH_DATA_DIR) + "/navigation.cfg";

// Golden values for the shipped grammar, frozen at first build.
constexpr std::uint64_t shipped_template_count = 103'968;
constexpr std::size_t shipped_production_count = 14;
constexpr std::size_t shipped_cover_size = 21;

GrammarError::Kind parse_error_kind(const std::string& text) {
  try {
    Grammar::parse_string(text);
  } catch (const GrammarError& e) {
    return e.kind();
  }
  FAIL("expected GrammarError");
  return GrammarError::Kind::Syntax;
}

/// Feature set used by minimal_cover: (placeholder, template style) pairs.
std::set<std::pair<std::string, TemplateStyle>> features_of(const TemplateSet& set,
                                                            const grammar::Template& t) {
  std::set<std::pair<std::string, TemplateStyle>> features;
  for (const auto& name : set.placeholder_names(t)) features.insert({name, t.style});
  return features;
}

}  // namespace

TEST_CASE("toy grammar parses into productions and nonterminals") {
  const auto g = Grammar::parse_string("S -> \"go\" DIR\nDIR -> \"north\" | \"south\"\n");
  CHECK(g.productions().size() == 2);  // one nonterminal beyond S
  CHECK(g.start_symbol() == "S");
  CHECK(g.count_templates() == 2);

  const auto set = grammar::enumerate_templates(g);
  REQUIRE(set.size() == 2);
  CHECK(set.text(set.at(0)) == "go north");
  CHECK(set.text(set.at(1)) == "go south");
}

TEST_CASE("two independent uses of a three-way nonterminal give nine templates") {
  const auto g = Grammar::parse_string(
      "S -> Word Word\n"
      "Word -> \"a\" | \"b\" | \"c\"\n");
  CHECK(g.count_templates() == 9);
  const auto set = grammar::enumerate_templates(g);
  CHECK(set.size() == 9);
  // Depth-first order: the leftmost symbol varies slowest.
  CHECK(set.text(set.at(0)) == "a a");
  CHECK(set.text(set.at(1)) == "a b");
  CHECK(set.text(set.at(8)) == "c c");
}

TEST_CASE("binary alternative start symbol") {
  const auto set = grammar::enumerate_templates(Grammar::parse_string("S -> \"a\" | \"b\"\n"));
  REQUIRE(set.size() == 2);
  CHECK(set.text(set.at(0)) == "a");
  CHECK(set.text(set.at(1)) == "b");
}

TEST_CASE("grammar diagnostics carry kinds and lines") {
  CHECK(parse_error_kind("S -> S \"x\"\n") == GrammarError::Kind::Recursion);
  CHECK(parse_error_kind("S -> \"a\" Foo\n") == GrammarError::Kind::UndefinedNonterminal);
  CHECK(parse_error_kind("S -> MYSTERY_SLOT\n") == GrammarError::Kind::UnknownPlaceholder);
  CHECK(parse_error_kind("S -> bare\n") == GrammarError::Kind::Syntax);
  CHECK(parse_error_kind("S -> \"a\" |\n") == GrammarError::Kind::Syntax);
  CHECK(parse_error_kind("S -> \"unterminated\n") == GrammarError::Kind::Syntax);
  CHECK(parse_error_kind("S -> \"a\"\nS -> \"b\"\n") == GrammarError::Kind::Syntax);

  // Indirect recursion is detected too.
  CHECK(parse_error_kind("S -> Ab\nAb -> Cd \"x\"\nCd -> Ab | \"y\"\n") ==
        GrammarError::Kind::Recursion);

  try {
    Grammar::parse_string("S -> \"ok\"\nT -> \"a\" Foo\n");
  } catch (const GrammarError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("capacity cap rejects oversized enumerations") {
  const auto g = Grammar::parse_string(
      "S -> W W W\n"
      "W -> \"a\" | \"b\" | \"c\" | \"d\"\n");
  CHECK(g.count_templates() == 64);
  CHECK_THROWS_AS(grammar::enumerate_templates(g, 63), GrammarError);
  CHECK_NOTHROW(grammar::enumerate_templates(g, 64));
}

TEST_CASE("comments, continuations, and quoted pipes parse") {
  const auto g = Grammar::parse_string(
      "# leading comment\n"
      "S -> \"a|b\" Tail  # trailing comment\n"
      "   | \"c\" Tail\n"
      "Tail -> \"z\"\n");
  CHECK(g.count_templates() == 2);
  const auto set = grammar::enumerate_templates(g);
  CHECK(set.text(set.at(0)) == "a|b z");
}

TEST_CASE("shipped grammar parses clean and matches its golden numbers") {
  const auto g = Grammar::parse_file(shipped_grammar_path);
  CHECK(g.productions().size() == shipped_production_count);
  CHECK(g.count_templates() == shipped_template_count);

  const auto set = grammar::enumerate_templates(g);
  CHECK(set.size() == shipped_template_count);

  const auto cover = grammar::minimal_cover(set);
  CHECK(cover.size() == shipped_cover_size);

  // Both style pools are usable and disjoint.
  const auto allo = grammar::filter_by_style(set, StyleFilter::Allocentric);
  const auto ego = grammar::filter_by_style(set, StyleFilter::Egocentric);
  CHECK(!allo.empty());
  CHECK(!ego.empty());
  std::set<std::uint32_t> allo_set(allo.begin(), allo.end());
  for (const auto idx : ego) CHECK(allo_set.count(idx) == 0);

  // No template resolves to the empty string and every template names the
  // goal.
  const int end_point = set.registry().index_of("END_POINT");
  REQUIRE(end_point >= 0);
  for (const auto& t : set.templates()) {
    CHECK(!t.tokens.empty());
    CHECK((t.placeholder_mask & (1u << end_point)) != 0);
  }
}

TEST_CASE("enumeration is deterministic") {
  const auto g = Grammar::parse_file(shipped_grammar_path);
  const auto a = grammar::enumerate_templates(g);
  const auto b = grammar::enumerate_templates(g);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.at(i).id == b.at(i).id);
  }
}

TEST_CASE("compatible_templates honors subsets and required mentions") {
  const auto g = Grammar::parse_string(
      "S -> \"meet at the\" END_POINT \".\"\n"
      "   | \"meet at the\" END_POINT \"near\" NEAR_PIVOT \".\"\n"
      "   | \"go to\" NEAR_PIVOT \".\"\n");
  const auto set = grammar::enumerate_templates(g);
  REQUIRE(set.size() == 3);

  // Nothing available: even the END_POINT-only template is out.
  CHECK(grammar::compatible_templates(set, {}).empty());

  // Only END_POINT available: the NEAR_PIVOT templates are excluded.
  const auto ep_only = grammar::compatible_templates(set, {"END_POINT"});
  REQUIRE(ep_only.size() == 1);
  CHECK(ep_only[0] == 0);

  // Both available: NEAR_PIVOT is required-when-available, so the
  // END_POINT-only template drops out, and so does the goal-less one.
  const auto both = grammar::compatible_templates(set, {"END_POINT", "NEAR_PIVOT"});
  REQUIRE(both.size() == 1);
  CHECK(both[0] == 1);

  // Relaxed mode keeps only the END_POINT requirement.
  const auto relaxed = grammar::compatible_templates(set, {"END_POINT", "NEAR_PIVOT"}, true);
  REQUIRE(relaxed.size() == 2);
  CHECK(relaxed[0] == 0);
  CHECK(relaxed[1] == 1);
}

TEST_CASE("compatible_templates equals a brute-force filter on random feature sets") {
  const auto g = Grammar::parse_file(shipped_grammar_path);
  const auto set = grammar::enumerate_templates(g);
  const auto& reg = set.registry();

  rng::Engine eng(3);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < reg.size(); ++i) names.push_back(reg.at(i).name);

  for (int trial = 0; trial < 20; ++trial) {
    std::set<std::string> available = {"END_POINT"};
    for (const auto& name : names) {
      if (rng::bounded(eng, 2) == 0) available.insert(name);
    }
    const auto got = grammar::compatible_templates(set, available);

    std::vector<std::uint32_t> want;
    for (std::uint32_t i = 0; i < set.size(); ++i) {
      const auto mentioned = set.placeholder_names(set.at(i));
      const bool subset = std::includes(available.begin(), available.end(),
                                        mentioned.begin(), mentioned.end());
      bool required_ok = mentioned.count("END_POINT") > 0;
      for (const auto& name : available) {
        const auto* info = reg.find(name);
        if (info && info->required_when_available && !mentioned.count(name)) required_ok = false;
      }
      if (subset && required_ok) want.push_back(i);
    }
    CHECK(got == want);
  }
}

TEST_CASE("minimal_cover follows the greedy novelty rule") {
  // Feature sets {A}, {A, B}, {A}: the first two are kept.
  const auto g = Grammar::parse_string(
      "S -> \"x\" END_POINT\n"
      "   | \"y\" END_POINT NEAR_PIVOT\n"
      "   | \"z\" END_POINT\n");
  const auto set = grammar::enumerate_templates(g);
  const auto cover = grammar::minimal_cover(set);
  REQUIRE(cover.size() == 2);
  CHECK(cover[0] == 0);
  CHECK(cover[1] == 1);
}

TEST_CASE("minimal_cover keeps only the first of identical templates") {
  const auto g = Grammar::parse_string("S -> \"m\" END_POINT | \"m\" END_POINT\n");
  const auto set = grammar::enumerate_templates(g);
  REQUIRE(set.size() == 2);
  CHECK(set.at(0).id == set.at(1).id);
  const auto cover = grammar::minimal_cover(set);
  REQUIRE(cover.size() == 1);
  CHECK(cover[0] == 0);
}

TEST_CASE("shipped cover spans the full feature universe and is greedily minimal") {
  const auto g = Grammar::parse_file(shipped_grammar_path);
  const auto set = grammar::enumerate_templates(g);
  const auto cover = grammar::minimal_cover(set);

  std::set<std::pair<std::string, TemplateStyle>> universe;
  for (const auto& t : set.templates()) universe.merge(features_of(set, t));

  std::set<std::pair<std::string, TemplateStyle>> covered;
  for (const auto idx : cover) {
    auto fs = features_of(set, set.at(idx));
    // The greedy rule: every kept template introduced something new.
    bool novel = false;
    for (const auto& f : fs) novel |= !covered.count(f);
    CHECK(novel);
    covered.merge(fs);
  }
  CHECK(covered == universe);
}

TEST_CASE("style filters: spec examples") {
  const auto g = Grammar::parse_string(
      "S -> \"go\" CARDINAL_DIRECTION \"to the\" END_POINT\n"
      "   | \"the\" END_POINT \"is on your\" EGO_SIDE\n"
      "   | \"go\" CARDINAL_DIRECTION \"; it is on your\" EGO_SIDE\n"
      "   | \"meet at the\" END_POINT\n");
  const auto set = grammar::enumerate_templates(g);
  const auto allo = grammar::filter_by_style(set, StyleFilter::Allocentric);
  const auto ego = grammar::filter_by_style(set, StyleFilter::Egocentric);

  // Allocentric keeps the cardinal template and the neutral one.
  CHECK(allo == std::vector<std::uint32_t>{0, 3});
  // Egocentric keeps only the pure EGO_SIDE template.
  CHECK(ego == std::vector<std::uint32_t>{1});
  // The mixed template appears in neither pool.
  CHECK(set.at(2).style == TemplateStyle::Mixed);
}

TEST_CASE("random acyclic grammars: analytic count equals enumeration") {
  rng::Engine eng(2026);
  const auto& reg = PlaceholderRegistry::standard();

  const std::vector<std::string> words = {"go",   "walk", "turn", "meet",  "at",
                                          "the",  "a",    "near", "past",  "to",
                                          "then", "stop", "by",   "along", "street"};

  int generated = 0;
  while (generated < 100) {
    // Build a random acyclic grammar over 2-5 nonterminals; production i
    // may only reference productions j > i.
    const int n_nts = 2 + static_cast<int>(rng::bounded(eng, 4));
    std::string text;
    for (int i = 0; i < n_nts; ++i) {
      std::string line = (i == 0 ? "Start" : "Nt" + std::to_string(i));
      line += " ->";
      const int n_alts = 1 + static_cast<int>(rng::bounded(eng, 3));
      for (int a = 0; a < n_alts; ++a) {
        if (a > 0) line += " |";
        const int n_syms = 1 + static_cast<int>(rng::bounded(eng, 3));
        for (int s = 0; s < n_syms; ++s) {
          const auto kind = rng::bounded(eng, 3);
          if (kind == 0 && i + 1 < n_nts) {
            const int target = i + 1 + static_cast<int>(rng::bounded(
                                           eng, static_cast<std::uint64_t>(n_nts - i - 1)));
            line += " Nt" + std::to_string(target);
          } else if (kind == 1) {
            line += " " + reg.at(rng::bounded(eng, reg.size())).name;
          } else {
            line += " \"" + words[rng::bounded(eng, words.size())] + "\"";
          }
        }
      }
      text += line + "\n";
    }

    Grammar g = Grammar::parse_string(text);
    const auto count = g.count_templates();
    if (count > 5000) continue;  // keep the enumeration cheap
    ++generated;

    const auto set = grammar::enumerate_templates(g);
    CHECK(set.size() == count);

    // Cover and style invariants hold for arbitrary grammars.
    const auto cover = grammar::minimal_cover(set);
    std::set<std::pair<std::string, TemplateStyle>> universe;
    for (const auto& t : set.templates()) universe.merge(features_of(set, t));
    std::set<std::pair<std::string, TemplateStyle>> covered;
    for (const auto idx : cover) {
      auto fs = features_of(set, set.at(idx));
      bool novel = false;
      for (const auto& f : fs) novel |= !covered.count(f);
      CHECK(novel);
      covered.merge(fs);
    }
    CHECK(covered == universe);

    const auto allo = grammar::filter_by_style(set, StyleFilter::Allocentric);
    const auto ego = grammar::filter_by_style(set, StyleFilter::Egocentric);
    std::set<std::uint32_t> allo_set(allo.begin(), allo.end());
    for (const auto idx : ego) CHECK(allo_set.count(idx) == 0);
  }
}
