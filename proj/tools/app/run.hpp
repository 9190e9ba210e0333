#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dilp/datasets.hpp"
#include "dilp/extraction.hpp"
#include "dilp/trainer.hpp"

namespace dilp::app {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

std::string version();

/// Where the training table comes from. Exactly one of rule, task and data is
/// set; `facts` may replace a task's built-in fact base.
struct DataSource {
  std::string rule;
  std::string task;
  std::string data;
  std::string facts;
  std::size_t rows = 1000;
  double noise = 0.0;
  std::uint64_t data_seed = 0;
  double split = 0.8;  // 1 trains and validates on the whole table

  bool operator==(const DataSource&) const = default;
};

struct RunConfig {
  TrainConfig train;
  DataSource source;

  bool operator==(const RunConfig&) const = default;
};

/// Names of every flat configuration key, in manifest order.
std::vector<std::string> config_keys();

/// Flat key/value form, the "config" object of a manifest.
Json to_json(const RunConfig& config);

/// Resolves a flat object: TrainConfig defaults, then the source presets
/// (relational tasks: balance false, accuracy_threshold 1; noisy rules:
/// eta_prime 0.8), then every key in `flat`. Throws DomainError for an unknown
/// key, a mistyped value, a missing or ambiguous source, or an invalid
/// training setting.
RunConfig resolve_config(const Json& flat);

/// Reads a flat config file or a manifest (its "config" object).
Json read_config_file(const std::filesystem::path& path);

struct Problem {
  PredicateSchema schema;
  Dataset train;
  Dataset val;
  std::optional<RuleAst> reference;
};

Problem load_problem(const DataSource& source);

struct ExtractedRule {
  SymbolicRule rule;
  CoverageReport coverage;
  SyntaxReport syntax;
};

struct RunResult {
  SearchReport search;
  std::vector<ExtractedRule> rules;
  std::optional<bool> recovered;
};

RunResult run(const RunConfig& config, const Problem& problem, std::size_t jobs, std::ostream* progress = nullptr);

std::vector<ExtractedRule> extract(const RuleWeights& w, const PredicateSchema& schema, double eta_prime,
                                   const Dataset* data);

/// manifest.json, rules.txt, history.csv, weights.json and timing.json under
/// `dir`. Everything except timing.json depends only on the config.
void write_outputs(const std::filesystem::path& dir, const RunConfig& config, const Problem& problem,
                   const RunResult& result);

Json manifest(const RunConfig& config, const Problem& problem, const RunResult& result);

std::string history_csv(const std::vector<EpochRecord>& history);

struct SavedWeights {
  PredicateSchema schema;
  RuleWeights weights;
};

Json weights_to_json(const RuleWeights& w, const PredicateSchema& schema);
SavedWeights read_weights(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace dilp::app
