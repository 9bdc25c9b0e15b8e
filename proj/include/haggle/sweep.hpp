#pragma once

// Declarative sweep configuration and the sweep driver.
//
// A sweep runs every (buyer, seller) combination against every sampled
// scenario. Each finished cell gets a transcript file and a line in an
// on-disk manifest, so an interrupted sweep can be resumed; results.csv is
// rewritten from the manifest in canonical cell order at the end.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "haggle/backend.hpp"
#include "haggle/corpus.hpp"
#include "haggle/prompting.hpp"
#include "haggle/results.hpp"
#include "haggle/runner.hpp"

namespace haggle {

struct BackendSpec {
  enum class Type { kHttp, kScripted };
  Type type = Type::kScripted;
  BackendConfig http;
  ScriptedPolicy policy;
};

struct SweepConfig {
  std::filesystem::path scenario_source;
  SchemaMap schema;
  std::size_t sample_size = kDefaultSampleSize;
  std::uint64_t seed = kDefaultSampleSeed;
  PromptConfig prompts = default_prompt_config();
  std::map<std::string, BackendSpec> backends;
  std::vector<AgentProfile> buyers;
  std::vector<AgentProfile> sellers;
  enum class Pairing { kCartesian, kExplicit };
  Pairing pairing = Pairing::kCartesian;
  std::vector<std::pair<std::string, std::string>> pairs;  // explicit (buyer, seller) names
  std::filesystem::path output_dir = "results";
  int parallel = 1;
  int max_turns = kDefaultMaxTurns;
  bool record_timing = true;
  bool log_exchanges = false;

  // Throws ConfigError on any inconsistency.
  void validate() const;

  // Ordered (buyer, seller) profile pairs.
  std::vector<std::pair<AgentProfile, AgentProfile>> combinations() const;
};

// Relative paths in the file resolve against the file's directory.
SweepConfig load_sweep_config(const std::filesystem::path& path);
SweepConfig sweep_config_from_json(std::string_view text, const std::filesystem::path& base_dir);

// Builds agents for profiles; HTTP backends are shared between agents.
class AgentFactory {
 public:
  explicit AgentFactory(const SweepConfig& config,
                        std::shared_ptr<ExchangeLog> log = nullptr);
  std::unique_ptr<Agent> make(const AgentProfile& profile) const;

 private:
  const SweepConfig& config_;
  std::map<std::string, std::shared_ptr<const ChatBackend>> http_;
};

struct SweepOptions {
  bool resume = false;
};

struct SweepSummary {
  std::vector<ResultRow> rows;  // canonical order: combination, then scenario
  std::size_t executed = 0;
  std::size_t resumed = 0;
  std::vector<LoadIssue> load_issues;
  std::filesystem::path results_csv;
};

// Loads and samples the scenario set configured in `config`.
std::vector<Scenario> load_sweep_scenarios(const SweepConfig& config,
                                           std::vector<LoadIssue>* issues = nullptr);

SweepSummary run_sweep(const SweepConfig& config, const SweepOptions& options = {});

// Reads results.csv from a sweep output directory.
std::vector<ResultRow> read_results(const std::filesystem::path& results_dir);

}  // namespace haggle
