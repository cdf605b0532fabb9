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

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "navsynth/generator.hpp"
#include "navsynth/grammar.hpp"
#include "navsynth/mapgraph.hpp"
#include "navsynth/metrics.hpp"

namespace {

namespace gen = navsynth::generator;
namespace gra = navsynth::grammar;
namespace geo = navsynth::geo;
namespace map = navsynth::mapgraph;
namespace met = navsynth::metrics;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_usage = 2;

std::string fnv1a_file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "unreadable";
  std::uint64_t h = 0xCBF29CE484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::string iso8601_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void print_bundle_diagnostics(const map::BundleError& e) {
  ordered_json diags = ordered_json::array();
  for (const auto& d : e.diagnostics()) {
    ordered_json j;
    j["file"] = d.file;
    j["line"] = d.line;
    j["field"] = d.field;
    j["message"] = d.message;
    diags.push_back(std::move(j));
  }
  std::cerr << diags.dump() << "\n";
}

struct BundleArgs {
  std::string entities;
  std::string streets;

  void attach(CLI::App* cmd, bool required = true) {
    auto* e = cmd->add_option("--entities", entities, "entities.jsonl path");
    auto* s = cmd->add_option("--streets", streets, "streets.jsonl path");
    if (required) {
      e->required();
      s->required();
    }
  }
};

// ---------------------------------------------------------------------------
// validate-map

int cmd_validate_map(const BundleArgs& paths) {
  try {
    const auto bundle = map::load_bundle(paths.entities, paths.streets);
    std::cout << "entities: " << bundle.entities().size() << "\n"
              << "nodes: " << bundle.graph().node_count() << "\n"
              << "edges: " << bundle.graph().edge_count() << "\n"
              << "components: " << bundle.graph().component_count() << "\n";
    return exit_ok;
  } catch (const map::BundleError& e) {
    print_bundle_diagnostics(e);
    return exit_validation;
  }
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  BundleArgs bundle;
  std::string grammar_path;
  std::string mode = "cfg";
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  std::string out;
  int retries = 50;
  std::string rewriter = "identity";
  int jobs = static_cast<int>(std::thread::hardware_concurrency());
};

int cmd_generate(const GenerateArgs& args) {
  const auto t0 = std::chrono::steady_clock::now();
  const gen::Mode mode = gen::mode_from_string(args.mode);

  map::MapBundle bundle;
  try {
    bundle = map::load_bundle(args.bundle.entities, args.bundle.streets);
  } catch (const map::BundleError& e) {
    print_bundle_diagnostics(e);
    return exit_validation;
  }

  std::optional<gra::Grammar> grammar;
  std::optional<gra::TemplateSet> templates;
  if (mode != gen::Mode::Dummy) {
    if (args.grammar_path.empty()) {
      std::cerr << "mode '" << args.mode << "' requires --grammar\n";
      return exit_usage;
    }
    grammar = gra::Grammar::parse_file(args.grammar_path);
    templates = gra::enumerate_templates(*grammar);
  }

  auto rewriter = gen::make_rewriter(args.rewriter);

  gen::GenerationConfig config;
  config.mode = mode;
  config.seed = args.seed;
  config.n = args.n;
  config.retries = args.retries;
  config.jobs = std::max(1, args.jobs);
  config.templates = templates ? &*templates : nullptr;
  config.rewriter = rewriter.get();

  const auto result = gen::generate_dataset(bundle, config);
  if (result.misses > 0) {
    std::cerr << "warning: " << result.misses << " of " << args.n << " records missed after "
              << args.retries << " retries\n";
  }

  std::ofstream out(args.out, std::ios::binary);
  if (!out) {
    std::cerr << "cannot open output file '" << args.out << "'\n";
    return exit_validation;
  }
  for (const auto& record : result.records) {
    out << gen::to_jsonl(record) << "\n";
  }
  out.close();

  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

  ordered_json manifest;
  ordered_json cfg;
  cfg["entities"] = args.bundle.entities;
  cfg["streets"] = args.bundle.streets;
  cfg["grammar"] = mode == gen::Mode::Dummy ? "" : args.grammar_path;
  cfg["mode"] = args.mode;
  cfg["n"] = args.n;
  cfg["seed"] = args.seed;
  cfg["retries"] = args.retries;
  cfg["rewriter"] = args.rewriter;
  cfg["jobs"] = config.jobs;
  cfg["out"] = args.out;
  manifest["config"] = std::move(cfg);
  manifest["entities_hash"] = fnv1a_file_hash(args.bundle.entities);
  manifest["streets_hash"] = fnv1a_file_hash(args.bundle.streets);
  manifest["grammar_hash"] =
      mode == gen::Mode::Dummy ? json("n/a") : json(fnv1a_file_hash(args.grammar_path));
  manifest["template_pool"] = mode == gen::Mode::Dummy ? json("n/a") : json(result.pool_size);
  manifest["records"] = result.records.size();
  manifest["misses"] = result.misses;
  manifest["generated_at"] = iso8601_utc_now();
  manifest["wall_time_ms"] = wall_ms;

  std::ofstream mout(args.out + ".manifest.json", std::ios::binary);
  mout << manifest.dump(2) << "\n";
  std::cout << "wrote " << result.records.size() << " records to " << args.out << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// stats

std::vector<gen::InstructionRecord> read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open dataset '" + path + "'");
  }
  std::vector<gen::InstructionRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(gen::record_from_jsonl(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

int cmd_stats(const std::string& dataset_path, const std::string& csv_out) {
  const auto records = read_dataset(dataset_path);
  if (records.empty()) {
    std::cerr << "dataset '" << dataset_path << "' contains no records\n";
    return exit_validation;
  }
  double token_sum = 0.0;
  double entity_sum = 0.0;
  std::set<std::string> vocabulary;
  for (const auto& r : records) {
    const auto tokens = gen::tokenize(r.instruction);
    token_sum += static_cast<double>(tokens.size());
    entity_sum += gen::entity_mentions(r);
    vocabulary.insert(tokens.begin(), tokens.end());
  }
  const double n = static_cast<double>(records.size());
  const double avg_tokens = token_sum / n;
  const double avg_entities = entity_sum / n;

  std::printf("%-14s %12s\n", "metric", "value");
  std::printf("%-14s %12.2f\n", "avg_tokens", avg_tokens);
  std::printf("%-14s %12.2f\n", "avg_entities", avg_entities);
  std::printf("%-14s %12zu\n", "vocabulary", vocabulary.size());
  std::printf("%-14s %12zu\n", "records", records.size());

  if (!csv_out.empty()) {
    std::ofstream out(csv_out, std::ios::binary);
    out << "metric,value\n";
    out << "avg_tokens," << avg_tokens << "\n";
    out << "avg_entities," << avg_entities << "\n";
    out << "vocabulary," << vocabulary.size() << "\n";
    out << "records," << records.size() << "\n";
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string dataset;
  std::string predictions;
  std::string baseline;
  BundleArgs bundle;
  std::vector<double> radii;
  std::string json_out;
  std::string cdf_out;
  double cdf_max = 5000.0;
  int cdf_steps = 51;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const auto records = read_dataset(args.dataset);
  if (records.empty()) {
    std::cerr << "dataset '" << args.dataset << "' contains no records\n";
    return exit_validation;
  }
  std::map<std::string, const gen::InstructionRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;

  std::vector<met::EvalPair> pairs;
  if (!args.baseline.empty()) {
    if (args.baseline != "landmark") {
      std::cerr << "unknown baseline '" << args.baseline << "'\n";
      return exit_usage;
    }
    map::MapBundle bundle;
    try {
      bundle = map::load_bundle(args.bundle.entities, args.bundle.streets);
    } catch (const map::BundleError& e) {
      print_bundle_diagnostics(e);
      return exit_validation;
    }
    for (const auto& r : records) {
      pairs.push_back({r.goal, met::landmark_baseline(bundle, r.start).point});
    }
  } else {
    if (args.predictions.empty()) {
      std::cerr << "evaluate needs --predictions or --baseline landmark\n";
      return exit_usage;
    }
    std::ifstream in(args.predictions);
    if (!in) {
      std::cerr << "cannot open predictions '" << args.predictions << "'\n";
      return exit_validation;
    }
    std::vector<std::string> unmatched;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("id") || !j.contains("pred")) {
        std::cerr << args.predictions << ":" << line_no
                  << ": expected {\"id\": str, \"pred\": [lon, lat]}\n";
        return exit_validation;
      }
      const std::string id = j["id"].get<std::string>();
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        unmatched.push_back(id);
        continue;
      }
      const auto& pred = j["pred"];
      pairs.push_back(
          {it->second->goal, geo::GeoPoint(pred[1].get<double>(), pred[0].get<double>())});
    }
    if (!unmatched.empty()) {
      std::cerr << "predictions reference unknown record ids:";
      for (const auto& id : unmatched) std::cerr << " " << id;
      std::cerr << "\n";
      return exit_validation;
    }
    if (pairs.size() < records.size()) {
      std::cerr << "note: " << pairs.size() << " of " << records.size()
                << " records have predictions\n";
    }
  }

  const std::vector<double> radii = args.radii.empty() ? met::default_radii : args.radii;
  const auto report = met::evaluate(pairs, {}, radii);

  for (const auto& [radius, pct] : report.accuracy_pct) {
    std::printf("%.0fm accuracy   %10.2f %%\n", radius, pct);
  }
  std::printf("MAE             %10.1f m\n", report.mae_m);
  std::printf("Med.AE          %10.1f m\n", report.medae_m);
  std::printf("Max.AE          %10.1f m\n", report.maxae_m);
  if (report.auc) {
    std::printf("AUC             %10.3f\n", *report.auc);
  } else {
    std::printf("AUC                    n/a  (needs at least 2 pairs)\n");
  }
  std::printf("pairs           %10zu\n", report.count);

  if (!args.json_out.empty()) {
    ordered_json j;
    ordered_json acc;
    for (const auto& [radius, pct] : report.accuracy_pct) {
      char key[32];
      std::snprintf(key, sizeof key, "%g", radius);
      acc[key] = pct;
    }
    j["accuracy_pct"] = std::move(acc);
    j["mae_m"] = report.mae_m;
    j["medae_m"] = report.medae_m;
    j["maxae_m"] = report.maxae_m;
    j["auc"] = report.auc ? json(*report.auc) : json(nullptr);
    j["pairs"] = report.count;
    std::ofstream out(args.json_out, std::ios::binary);
    out << j.dump(2) << "\n";
  }

  if (!args.cdf_out.empty()) {
    const auto cdf = met::cdf_export(pairs, args.cdf_max, args.cdf_steps);
    std::ofstream out(args.cdf_out, std::ios::binary);
    out << "distance_m,cumulative_pct\n";
    for (const auto& point : cdf) {
      out << point.distance_m << "," << point.cumulative_pct << "\n";
    }
  }
  return exit_ok;
}

// ---------------------------------------------------------------------------
// grammar

int cmd_grammar(const std::string& subcommand, const std::string& grammar_path, bool dump) {
  const auto grammar = gra::Grammar::parse_file(grammar_path);
  if (subcommand == "lint") {
    // Parsing already ran every structural check; report scale and leave.
    const auto count = grammar.count_templates();
    std::cout << "ok: " << grammar.productions().size() << " productions, " << count
              << " templates, no diagnostics\n";
    return exit_ok;
  }
  if (subcommand == "enumerate") {
    const auto set = gra::enumerate_templates(grammar);
    std::cout << set.size() << " templates\n";
    if (dump) {
      for (const auto& t : set.templates()) std::cout << set.text(t) << "\n";
    }
    return exit_ok;
  }
  if (subcommand == "minimal") {
    const auto set = gra::enumerate_templates(grammar);
    const auto cover = gra::minimal_cover(set);
    std::cout << cover.size() << " templates in minimal cover\n";
    for (const auto idx : cover) std::cout << set.text(set.at(idx)) << "\n";
    return exit_ok;
  }
  std::cerr << "unknown grammar subcommand '" << subcommand << "'\n";
  return exit_usage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"navsynth: grounded navigation-instruction synthesis and geolocation evaluation"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate-map", "Load a map bundle and run all invariants");
  BundleArgs validate_args;
  validate_args.attach(validate);

  auto* generate = app.add_subcommand("generate", "Generate an instruction dataset");
  GenerateArgs generate_args;
  generate_args.bundle.attach(generate);
  generate->add_option("--grammar", generate_args.grammar_path, "grammar file (CFG modes)");
  generate->add_option("--mode", generate_args.mode, "generation mode")
      ->check(CLI::IsMember(
          {"cfg", "cfg-allocentric", "cfg-egocentric", "cfg-minimal", "dummy", "prompt"}));
  generate->add_option("--n", generate_args.n, "number of records")->required();
  generate->add_option("--seed", generate_args.seed, "global seed");
  generate->add_option("--out", generate_args.out, "output dataset path")->required();
  generate->add_option("--retries", generate_args.retries, "resample budget per record");
  generate->add_option("--rewriter", generate_args.rewriter,
                       "identity, fixture:PATH, or http:URL (prompt mode)");
  generate->add_option("--jobs", generate_args.jobs, "worker threads (output is identical)");

  auto* stats = app.add_subcommand("stats", "Dataset statistics (tokens, entities, vocabulary)");
  std::string stats_dataset;
  std::string stats_csv;
  stats->add_option("dataset", stats_dataset, "dataset JSONL path")->required();
  stats->add_option("--csv-out", stats_csv, "also write the table as CSV");

  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against dataset goals");
  EvaluateArgs evaluate_args;
  evaluate->add_option("--dataset", evaluate_args.dataset, "dataset JSONL path")->required();
  evaluate->add_option("--predictions", evaluate_args.predictions,
                       "predictions JSONL ({\"id\", \"pred\": [lon, lat]})");
  evaluate->add_option("--baseline", evaluate_args.baseline,
                       "compute predictions internally (landmark)");
  evaluate_args.bundle.attach(evaluate, /*required=*/false);
  evaluate->add_option("--radius", evaluate_args.radii,
                       "accuracy radius in meters (repeatable; default 100 and 250)");
  evaluate->add_option("--json-out", evaluate_args.json_out, "write the report as JSON");
  evaluate->add_option("--cdf-out", evaluate_args.cdf_out, "write the error CDF as CSV");
  evaluate->add_option("--cdf-max", evaluate_args.cdf_max, "CDF grid maximum distance (m)");
  evaluate->add_option("--cdf-steps", evaluate_args.cdf_steps, "CDF grid points");

  auto* grammar_cmd = app.add_subcommand("grammar", "Inspect a grammar file");
  std::string grammar_sub;
  std::string grammar_path;
  bool grammar_dump = false;
  grammar_cmd->add_option("subcommand", grammar_sub, "enumerate | minimal | lint")->required();
  grammar_cmd->add_option("--grammar", grammar_path, "grammar file")->required();
  grammar_cmd->add_flag("--dump", grammar_dump, "print every template (enumerate)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (validate->parsed()) return cmd_validate_map(validate_args);
    if (generate->parsed()) return cmd_generate(generate_args);
    if (stats->parsed()) return cmd_stats(stats_dataset, stats_csv);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
    if (grammar_cmd->parsed()) return cmd_grammar(grammar_sub, grammar_path, grammar_dump);
  } catch (const gra::GrammarError& e) {
    std::cerr << e.what() << "\n";
    return exit_validation;
  } catch (const map::BundleError& e) {
    print_bundle_diagnostics(e);
    return exit_validation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  }
  return exit_usage;
}
