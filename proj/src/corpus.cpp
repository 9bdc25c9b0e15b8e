#include "haggle/corpus.hpp"

#include <algorithm>
#include <limits>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <variant>

#include <nlohmann/json.hpp>

#include "haggle/csv.hpp"
#include "haggle/errors.hpp"

namespace haggle {

namespace {

using nlohmann::json;

constexpr std::string_view kRecordKey = "$record";

const std::vector<std::string> kFields = {
    "id", "title", "description", "category", "listing_price", "buyer_target", "seller_target"};

bool is_price_field(const std::string& field) {
  return field == "listing_price" || field == "buyer_target" || field == "seller_target";
}

// A raw field value pulled from a record before conversion.
struct RawValue {
  std::variant<std::monostate, std::string, double> value;
  std::string number_text;  // original spelling of JSON numbers
  bool present() const { return !std::holds_alternative<std::monostate>(value); }
};

RawValue from_json(const json& j) {
  if (j.is_string()) return {j.get<std::string>(), {}};
  if (j.is_number()) return {j.get<double>(), j.dump()};
  if (j.is_array()) {
    // Craigslist exports keep item descriptions as arrays of sentences.
    std::string joined;
    for (const auto& part : j) {
      if (!part.is_string()) return {};
      if (!joined.empty()) joined += ' ';
      joined += part.get<std::string>();
    }
    return {joined, {}};
  }
  return {};
}

RawValue lookup_json(const json& record, const std::string& source) {
  if (!source.empty() && source.front() == '/') {
    try {
      const json::json_pointer ptr(source);
      if (!record.contains(ptr)) return {};
      return from_json(record.at(ptr));
    } catch (const json::exception&) {
      return {};
    }
  }
  if (!record.is_object()) return {};
  const auto it = record.find(source);
  return it == record.end() ? RawValue{} : from_json(*it);
}

std::string text_of(const RawValue& raw) {
  if (const auto* s = std::get_if<std::string>(&raw.value)) return *s;
  if (std::holds_alternative<double>(raw.value)) return raw.number_text;
  return {};
}

struct Converted {
  std::optional<Scenario> scenario;
  std::string id;
  std::string error;
};

// Shared validation for both input formats. `fetch` returns the raw value
// for a Scenario field name.
template <typename Fetch>
Converted convert(std::size_t record_no, const SchemaMap& schema, Fetch&& fetch) {
  Converted out;
  Scenario s;
  const std::string& id_source = schema.source_for("id");
  if (id_source == kRecordKey) {
    s.id = std::to_string(record_no);
  } else {
    const RawValue raw = fetch("id");
    if (!raw.present()) {
      out.error = "missing field 'id' (source '" + id_source + "')";
      return out;
    }
    s.id = text_of(raw);
  }
  out.id = s.id;

  for (const std::string& field : kFields) {
    if (field == "id") continue;
    const RawValue raw = fetch(field);
    if (!raw.present()) {
      out.error = "missing field '" + field + "' (source '" + schema.source_for(field) + "')";
      return out;
    }
    if (is_price_field(field)) {
      std::optional<Money> price;
      if (const auto* d = std::get_if<double>(&raw.value)) {
        price = Money::from_double(*d);
      } else {
        price = Money::parse(std::get<std::string>(raw.value));
      }
      if (!price) {
        out.error = "non-numeric " + field + " '" + text_of(raw) + "'";
        return out;
      }
      if (price->cents() <= 0) {
        out.error = field + " must be positive, got " + price->to_string();
        return out;
      }
      if (field == "listing_price") s.listing_price = *price;
      if (field == "buyer_target") s.buyer_target = *price;
      if (field == "seller_target") s.seller_target = *price;
    } else {
      std::string text = text_of(raw);
      if (field == "title") s.title = std::move(text);
      if (field == "description") s.description = std::move(text);
      if (field == "category") s.category = std::move(text);
    }
  }
  out.scenario = std::move(s);
  return out;
}

void accept_converted(Converted converted, std::size_t record_no, std::set<std::string>& seen,
                      LoadResult& result) {
  if (!converted.scenario) {
    result.issues.push_back({record_no, converted.id, converted.error, LoadIssue::Severity::kRejected});
    return;
  }
  Scenario& s = *converted.scenario;
  if (s.buyer_target >= s.seller_target) {
    result.issues.push_back({record_no, s.id,
                             "buyer_target " + s.buyer_target.to_string() + " >= seller_target " +
                                 s.seller_target.to_string(),
                             LoadIssue::Severity::kSkipped});
    return;
  }
  if (!seen.insert(s.id).second) {
    result.issues.push_back(
        {record_no, s.id, "duplicate scenario id", LoadIssue::Severity::kRejected});
    return;
  }
  result.scenarios.push_back(std::move(s));
}

LoadResult load_jsonl(std::istream& in, const SchemaMap& schema) {
  LoadResult result;
  std::set<std::string> seen;
  std::string line;
  std::size_t record_no = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++record_no;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      result.issues.push_back(
          {record_no, "", std::string("invalid JSON: ") + e.what(), LoadIssue::Severity::kRejected});
      continue;
    }
    auto fetch = [&](const std::string& field) {
      return lookup_json(record, schema.source_for(field));
    };
    accept_converted(convert(record_no, schema, fetch), record_no, seen, result);
  }
  return result;
}

LoadResult load_csv(std::istream& in, const SchemaMap& schema) {
  LoadResult result;
  csv::Record header;
  if (!csv::read_record(in, header)) return result;

  std::map<std::string, std::size_t> column;
  for (const auto& field : kFields) {
    const std::string& source = schema.source_for(field);
    if (source == kRecordKey) continue;
    const auto it = std::find(header.begin(), header.end(), source);
    if (it == header.end()) {
      throw DataError("csv header has no column '" + source + "' for field '" + field + "'");
    }
    column[field] = static_cast<std::size_t>(it - header.begin());
  }

  std::set<std::string> seen;
  csv::Record row;
  std::size_t record_no = 0;
  while (csv::read_record(in, row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    ++record_no;
    auto fetch = [&](const std::string& field) -> RawValue {
      const std::size_t idx = column.at(field);
      if (idx >= row.size()) return {};
      return {row[idx], {}};
    };
    accept_converted(convert(record_no, schema, fetch), record_no, seen, result);
  }
  return result;
}

// Unbiased draw in [0, bound) from the raw 64-bit stream. Avoids the
// implementation-defined std::uniform_int_distribution so samples are
// identical across standard libraries.
std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

}  // namespace

const std::vector<std::string>& SchemaMap::field_names() { return kFields; }

SchemaMap::SchemaMap(std::map<std::string, std::string> field_to_source)
    : map_(std::move(field_to_source)) {
  for (const auto& [field, source] : map_) {
    if (std::find(kFields.begin(), kFields.end(), field) == kFields.end()) {
      throw ConfigError("schema map names unknown scenario field '" + field + "'");
    }
    if (source.empty()) throw ConfigError("schema map has empty source for '" + field + "'");
  }
  map_.try_emplace("id", std::string(kRecordKey));
  for (const auto& field : kFields) {
    if (!map_.count(field)) throw ConfigError("schema map does not cover field '" + field + "'");
  }
}

const std::string& SchemaMap::source_for(const std::string& field) const {
  const auto it = map_.find(field);
  if (it == map_.end()) throw ConfigError("schema map does not cover field '" + field + "'");
  return it->second;
}

LoadResult load_scenarios(const std::filesystem::path& source, const SchemaMap& schema) {
  const auto ext = source.extension().string();
  return load_scenarios(source, schema,
                        ext == ".csv" || ext == ".CSV" ? ScenarioFormat::kCsv
                                                       : ScenarioFormat::kJsonLines);
}

LoadResult load_scenarios(const std::filesystem::path& source, const SchemaMap& schema,
                          ScenarioFormat format) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw DataError("cannot open scenario file '" + source.string() + "'");
  return format == ScenarioFormat::kCsv ? load_csv(in, schema) : load_jsonl(in, schema);
}

std::vector<Scenario> sample_scenarios(const std::vector<Scenario>& scenarios, std::size_t n,
                                       std::uint64_t seed) {
  if (n > scenarios.size()) {
    throw std::invalid_argument("cannot sample " + std::to_string(n) + " scenarios from " +
                                std::to_string(scenarios.size()));
  }
  std::vector<std::size_t> idx(scenarios.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + bounded_draw(rng, idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());

  std::vector<Scenario> out;
  out.reserve(n);
  for (std::size_t i : idx) out.push_back(scenarios[i]);
  return out;
}

std::pair<KnowledgeBase, KnowledgeBase> build_knowledge_bases(const Scenario& scenario) {
  auto base = [&](Role role, Money target) {
    return KnowledgeBase{role,
                         scenario.id,
                         scenario.title,
                         scenario.description,
                         scenario.category,
                         scenario.listing_price,
                         target};
  };
  return {base(Role::kBuyer, scenario.buyer_target), base(Role::kSeller, scenario.seller_target)};
}

}  // namespace haggle
