#pragma once

// Scenario ingestion, sampling and per-role knowledge bases.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "haggle/money.hpp"
#include "haggle/role.hpp"

namespace haggle {

struct Scenario {
  std::string id;
  std::string title;
  std::string description;
  std::string category;
  Money listing_price;
  Money buyer_target;
  Money seller_target;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Private context handed to one party. Holds only that party's target.
struct KnowledgeBase {
  Role role = Role::kBuyer;
  std::string scenario_id;
  std::string title;
  std::string description;
  std::string category;
  Money listing_price;
  Money target_price;

  friend bool operator==(const KnowledgeBase&, const KnowledgeBase&) = default;
};

// Maps Scenario field names to source keys.
//
// For JSON-lines input a source key is either a top-level member name or a
// JSON pointer ("/items/Price/0"). For CSV input it is a header column name.
// The reserved source key "$record" yields the 1-based record number, which
// lets datasets without an id column still produce stable scenario ids.
// A mapping for "id" is optional and defaults to "$record".
class SchemaMap {
 public:
  static const std::vector<std::string>& field_names();

  SchemaMap() = default;
  // Throws ConfigError on unknown Scenario fields or missing required ones.
  explicit SchemaMap(std::map<std::string, std::string> field_to_source);

  const std::string& source_for(const std::string& field) const;
  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

enum class ScenarioFormat { kJsonLines, kCsv };

struct LoadIssue {
  enum class Severity { kRejected, kSkipped };
  std::size_t record = 0;  // 1-based record number (data rows for CSV)
  std::string id;          // empty when the id itself could not be read
  std::string reason;
  Severity severity = Severity::kRejected;
};

struct LoadResult {
  std::vector<Scenario> scenarios;
  std::vector<LoadIssue> issues;
};

// Format is inferred from the extension: ".csv" is CSV, anything else is
// JSON lines. Throws DataError when the file cannot be opened or a CSV header
// lacks a mapped column; per-record problems end up in LoadResult::issues.
LoadResult load_scenarios(const std::filesystem::path& source, const SchemaMap& schema);
LoadResult load_scenarios(const std::filesystem::path& source, const SchemaMap& schema,
                          ScenarioFormat format);

inline constexpr std::size_t kDefaultSampleSize = 30;
inline constexpr std::uint64_t kDefaultSampleSeed = 2024;

// Uniform sample of n distinct scenarios, returned in source order. Pure in
// (scenarios, n, seed). Throws std::invalid_argument when n > size.
std::vector<Scenario> sample_scenarios(const std::vector<Scenario>& scenarios, std::size_t n,
                                       std::uint64_t seed);

std::pair<KnowledgeBase, KnowledgeBase> build_knowledge_bases(const Scenario& scenario);

}  // namespace haggle
