#include "haggle/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "haggle/csv.hpp"
#include "haggle/errors.hpp"
#include "haggle/transcript.hpp"

namespace haggle {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": '" + key + "' has the wrong type");
  }
}

std::string require_str(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ConfigError(where + ": missing string '" + key + "'");
  }
  return j.at(key).get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

BackendSpec parse_backend(const std::string& name, const json& j) {
  const std::string where = "backend '" + name + "'";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::string type = require_str(j, "type", where);
  BackendSpec spec;
  if (type == "http") {
    reject_unknown_keys(j,
                        {"type", "base_url", "model", "temperature", "max_tokens", "timeout_ms",
                         "max_retries", "backoff_base_ms", "backoff_max_ms", "max_concurrency",
                         "api_key_env"},
                        where);
    spec.type = BackendSpec::Type::kHttp;
    BackendConfig& c = spec.http;
    c.base_url = require_str(j, "base_url", where);
    c.model_name = require_str(j, "model", where);
    c.temperature = get_or(j, "temperature", c.temperature, where);
    c.max_tokens = get_or(j, "max_tokens", c.max_tokens, where);
    c.timeout = std::chrono::milliseconds(get_or<long long>(j, "timeout_ms", c.timeout.count(), where));
    c.max_retries = get_or(j, "max_retries", c.max_retries, where);
    c.backoff_base = std::chrono::milliseconds(
        get_or<long long>(j, "backoff_base_ms", c.backoff_base.count(), where));
    c.backoff_max = std::chrono::milliseconds(
        get_or<long long>(j, "backoff_max_ms", c.backoff_max.count(), where));
    c.max_concurrency = get_or(j, "max_concurrency", c.max_concurrency, where);
    c.api_key_env = get_or<std::string>(j, "api_key_env", c.api_key_env, where);
    try {
      c.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  } else if (type == "scripted") {
    reject_unknown_keys(j, {"type", "policy", "opening_fraction", "step_fraction", "accept_threshold"},
                        where);
    spec.type = BackendSpec::Type::kScripted;
    const auto kind = parse_policy_kind(require_str(j, "policy", where));
    if (!kind) throw ConfigError(where + ": unknown scripted policy");
    spec.policy.kind = *kind;
    spec.policy.opening_fraction = get_or(j, "opening_fraction", spec.policy.opening_fraction, where);
    spec.policy.step_fraction = get_or(j, "step_fraction", spec.policy.step_fraction, where);
    spec.policy.accept_threshold = get_or(j, "accept_threshold", spec.policy.accept_threshold, where);
    try {
      spec.policy.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  } else {
    throw ConfigError(where + ": unknown type '" + type + "' (expected http or scripted)");
  }
  return spec;
}

std::vector<AgentProfile> parse_profiles(const json& j, Role role) {
  const std::string where = std::string(role_name(role)) + "s";
  if (!j.is_array()) throw ConfigError(where + ": expected an array");
  std::vector<AgentProfile> out;
  for (const auto& item : j) {
    reject_unknown_keys(item, {"name", "backend", "personality", "cot"}, where);
    AgentProfile p;
    p.role = role;
    p.name = require_str(item, "name", where);
    p.model_ref = require_str(item, "backend", where);
    const auto personality =
        parse_personality(get_or<std::string>(item, "personality", "none", where));
    if (!personality) throw ConfigError(where + ": unknown personality for '" + p.name + "'");
    p.personality = *personality;
    p.cot = get_or(item, "cot", false, where);
    out.push_back(std::move(p));
  }
  return out;
}

std::string slug(std::string_view text) {
  std::string out;
  for (char c : text) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '-' || c == '_' || c == '.';
    out += keep ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

std::string cell_key(const std::string& combination, const std::string& scenario_id) {
  return combination + '\t' + scenario_id;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomically(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp + "'");
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string run_info_json(const SweepConfig& config, std::size_t scenarios) {
  ordered_json j;
  j["results_schema"] = kResultsSchemaVersion;
  j["transcript_schema"] = kTranscriptSchema;
  j["scenario_source"] = config.scenario_source.filename().string();
  j["sample_size"] = scenarios;
  j["seed"] = config.seed;
  j["max_turns"] = config.max_turns;
  j["prompt_config_version"] = config.prompts.version;
  j["combinations"] = config.combinations().size();
  ordered_json backends = ordered_json::object();
  for (const auto& [name, spec] : config.backends) {
    if (spec.type == BackendSpec::Type::kHttp) {
      backends[name] = {{"type", "http"},
                        {"model", spec.http.model_name},
                        {"temperature", spec.http.temperature},
                        {"max_tokens", spec.http.max_tokens}};
    } else {
      backends[name] = {{"type", "scripted"},
                        {"policy", policy_kind_name(spec.policy.kind)},
                        {"opening_fraction", spec.policy.opening_fraction},
                        {"step_fraction", spec.policy.step_fraction},
                        {"accept_threshold", spec.policy.accept_threshold}};
    }
  }
  j["backends"] = std::move(backends);
  j["note"] =
      "Decoding parameters (temperature, max_tokens) are harness defaults unless set in the "
      "sweep config.";
  return j.dump(2) + "\n";
}

}  // namespace

void SweepConfig::validate() const {
  if (scenario_source.empty()) throw ConfigError("sweep: no scenario source");
  if (sample_size == 0) throw ConfigError("sweep: sample_size must be > 0");
  if (buyers.empty() || sellers.empty()) {
    throw ConfigError("sweep: need at least one buyer and one seller profile");
  }
  if (parallel < 1) throw ConfigError("sweep: parallel must be >= 1");
  if (max_turns < 1) throw ConfigError("sweep: max_turns must be >= 1");
  prompts.validate();
  for (const auto* group : {&buyers, &sellers}) {
    std::set<std::string> names;
    for (const auto& p : *group) {
      if (p.name.empty()) throw ConfigError("sweep: profile with empty name");
      if (!names.insert(p.name).second) throw ConfigError("sweep: duplicate profile '" + p.name + "'");
      if (!backends.count(p.model_ref)) {
        throw ConfigError("sweep: profile '" + p.name + "' uses unknown backend '" + p.model_ref + "'");
      }
    }
  }
  if (pairing == Pairing::kExplicit) {
    if (pairs.empty()) throw ConfigError("sweep: explicit pairing list is empty");
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& [b, s] : pairs) {
      auto has = [](const std::vector<AgentProfile>& v, const std::string& n) {
        return std::any_of(v.begin(), v.end(), [&](const AgentProfile& p) { return p.name == n; });
      };
      if (!has(buyers, b)) throw ConfigError("sweep: pairing names unknown buyer '" + b + "'");
      if (!has(sellers, s)) throw ConfigError("sweep: pairing names unknown seller '" + s + "'");
      if (!seen.insert({b, s}).second) {
        throw ConfigError("sweep: pairing lists '" + b + " + " + s + "' twice");
      }
    }
  }
}

std::vector<std::pair<AgentProfile, AgentProfile>> SweepConfig::combinations() const {
  std::vector<std::pair<AgentProfile, AgentProfile>> out;
  if (pairing == Pairing::kCartesian) {
    for (const auto& b : buyers)
      for (const auto& s : sellers) out.emplace_back(b, s);
    return out;
  }
  auto find = [](const std::vector<AgentProfile>& v, const std::string& n) {
    return *std::find_if(v.begin(), v.end(), [&](const AgentProfile& p) { return p.name == n; });
  };
  for (const auto& [b, s] : pairs) out.emplace_back(find(buyers, b), find(sellers, s));
  return out;
}

SweepConfig sweep_config_from_json(std::string_view text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("sweep config: ") + e.what());
  }
  const std::string where = "sweep config";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  reject_unknown_keys(j,
                      {"description", "scenarios", "prompts", "max_turns", "backends", "buyers", "sellers",
                       "pairing", "output_dir", "parallel", "record_timing", "log_exchanges"},
                      where);

  SweepConfig c;
  if (!j.contains("scenarios")) throw ConfigError(where + ": missing 'scenarios'");
  const json& sc = j.at("scenarios");
  reject_unknown_keys(sc, {"source", "schema", "sample_size", "seed"}, "scenarios");
  c.scenario_source = resolve(base_dir, require_str(sc, "source", "scenarios"));
  if (!sc.contains("schema") || !sc.at("schema").is_object()) {
    throw ConfigError("scenarios: missing object 'schema'");
  }
  std::map<std::string, std::string> schema;
  for (const auto& [field, source] : sc.at("schema").items()) {
    if (!source.is_string()) throw ConfigError("scenarios: schema values must be strings");
    schema[field] = source.get<std::string>();
  }
  c.schema = SchemaMap(std::move(schema));
  c.sample_size = get_or<std::size_t>(sc, "sample_size", c.sample_size, "scenarios");
  c.seed = get_or<std::uint64_t>(sc, "seed", c.seed, "scenarios");

  if (j.contains("prompts")) {
    c.prompts = load_prompt_config(resolve(base_dir, require_str(j, "prompts", where)));
  }
  c.max_turns = get_or(j, "max_turns", c.max_turns, where);

  if (!j.contains("backends") || !j.at("backends").is_object()) {
    throw ConfigError(where + ": missing object 'backends'");
  }
  for (const auto& [name, spec] : j.at("backends").items()) {
    c.backends.emplace(name, parse_backend(name, spec));
  }
  if (!j.contains("buyers") || !j.contains("sellers")) {
    throw ConfigError(where + ": missing 'buyers' or 'sellers'");
  }
  c.buyers = parse_profiles(j.at("buyers"), Role::kBuyer);
  c.sellers = parse_profiles(j.at("sellers"), Role::kSeller);

  if (j.contains("pairing")) {
    const json& p = j.at("pairing");
    if (p.is_string() && p.get<std::string>() == "cartesian") {
      c.pairing = SweepConfig::Pairing::kCartesian;
    } else if (p.is_array()) {
      c.pairing = SweepConfig::Pairing::kExplicit;
      for (const auto& pair : p) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string()) {
          throw ConfigError("pairing: entries must be [buyer name, seller name]");
        }
        c.pairs.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
      }
    } else {
      throw ConfigError("pairing: expected \"cartesian\" or a list of [buyer, seller] pairs");
    }
  }
  c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "results", where));
  c.parallel = get_or(j, "parallel", c.parallel, where);
  c.record_timing = get_or(j, "record_timing", c.record_timing, where);
  c.log_exchanges = get_or(j, "log_exchanges", c.log_exchanges, where);
  c.validate();
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return sweep_config_from_json(text, path.parent_path());
}

AgentFactory::AgentFactory(const SweepConfig& config, std::shared_ptr<ExchangeLog> log)
    : config_(config) {
  for (const auto& [name, spec] : config.backends) {
    if (spec.type == BackendSpec::Type::kHttp) {
      http_.emplace(name, std::make_shared<const ChatBackend>(spec.http, log));
    }
  }
}

std::unique_ptr<Agent> AgentFactory::make(const AgentProfile& profile) const {
  const auto it = config_.backends.find(profile.model_ref);
  if (it == config_.backends.end()) {
    throw ConfigError("unknown backend '" + profile.model_ref + "'");
  }
  if (it->second.type == BackendSpec::Type::kHttp) {
    return std::make_unique<RemoteAgent>(http_.at(profile.model_ref));
  }
  return std::make_unique<ScriptedAgent>(it->second.policy);
}

std::vector<Scenario> load_sweep_scenarios(const SweepConfig& config,
                                           std::vector<LoadIssue>* issues) {
  LoadResult loaded = load_scenarios(config.scenario_source, config.schema);
  if (issues) *issues = loaded.issues;
  if (config.sample_size > loaded.scenarios.size()) {
    throw ConfigError("sweep: sample_size " + std::to_string(config.sample_size) +
                      " exceeds the " + std::to_string(loaded.scenarios.size()) +
                      " valid scenarios in " + config.scenario_source.string());
  }
  return sample_scenarios(loaded.scenarios, config.sample_size, config.seed);
}

SweepSummary run_sweep(const SweepConfig& config, const SweepOptions& options) {
  config.validate();
  SweepSummary summary;
  const auto scenarios = load_sweep_scenarios(config, &summary.load_issues);
  const auto combos = config.combinations();

  namespace fs = std::filesystem;
  const fs::path out = config.output_dir;
  fs::create_directories(out / "transcripts");
  const fs::path manifest_path = out / "manifest.jsonl";
  {
    std::ofstream probe(out / ".write-probe");
    if (!probe) throw ConfigError("sweep: output directory '" + out.string() + "' is not writable");
  }
  fs::remove(out / ".write-probe");

  struct Cell {
    std::size_t combo;
    std::size_t scenario;
    std::string key;
    std::string transcript_ref;
  };
  std::vector<Cell> cells;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    const std::string combo = combination_label(combos[c].first, combos[c].second);
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "c%03zu_", c + 1);
    const std::string dir = std::string(prefix) + slug(combo);
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
      cells.push_back({c, s, cell_key(combo, scenarios[s].id),
                       "transcripts/" + dir + "/" + slug(scenarios[s].id) + ".jsonl"});
    }
  }

  std::map<std::string, ResultRow> done;
  if (options.resume && fs::exists(manifest_path)) {
    std::ifstream in(manifest_path, std::ios::binary);
    std::string line, intact;
    while (std::getline(in, line)) {
      const json entry = json::parse(line, nullptr, false);
      // A torn final line from an interrupted writer is simply redone.
      if (entry.is_discarded() || !entry.contains("cell") || !entry.contains("row")) continue;
      try {
        done.insert_or_assign(entry.at("cell").get<std::string>(),
                              row_from_fields(entry.at("row").get<std::vector<std::string>>()));
      } catch (const std::exception&) {
        continue;
      }
      intact += line + "\n";
    }
    in.close();
    // Drop torn lines so that new entries start on a fresh line.
    write_file_atomically(manifest_path, intact);
  } else {
    fs::remove(manifest_path);
  }

  std::shared_ptr<ExchangeLog> exchange_log;
  if (config.log_exchanges) exchange_log = std::make_shared<ExchangeLog>(out / "exchanges.jsonl");
  const AgentFactory factory(config, exchange_log);

  std::vector<std::optional<ResultRow>> rows(cells.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto it = done.find(cells[i].key);
    if (it != done.end()) {
      rows[i] = it->second;
      ++summary.resumed;
    } else {
      todo.push_back(i);
    }
  }

  std::mutex writer_mu;
  std::ofstream manifest(manifest_path, std::ios::binary | std::ios::app);
  if (!manifest) throw DataError("cannot open manifest '" + manifest_path.string() + "'");

  RunOptions run_options;
  run_options.max_turns = config.max_turns;
  run_options.record_timing = config.record_timing;
  run_options.prompts = &config.prompts;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;

  auto worker = [&] {
    while (!abort) {
      const std::size_t t = next++;
      if (t >= todo.size()) return;
      const Cell& cell = cells[todo[t]];
      try {
        const auto& [buyer_profile, seller_profile] = combos[cell.combo];
        const auto buyer = factory.make(buyer_profile);
        const auto seller = factory.make(seller_profile);
        const NegotiationRun run = run_negotiation(scenarios[cell.scenario], buyer_profile, *buyer,
                                                   seller_profile, *seller, run_options);
        ResultRow row = make_result_row(run, cell.transcript_ref);

        std::lock_guard lock(writer_mu);
        const fs::path transcript_path = out / cell.transcript_ref;
        fs::create_directories(transcript_path.parent_path());
        write_transcript(transcript_path, run);
        const json entry = {{"cell", cell.key}, {"row", row_fields(row)}};
        manifest << entry.dump() << '\n';
        manifest.flush();
        rows[todo[t]] = std::move(row);
      } catch (...) {
        std::lock_guard lock(writer_mu);
        if (!error) error = std::current_exception();
        abort = true;
        return;
      }
    }
  };

  {
    const int workers = std::max(1, std::min<int>(config.parallel, static_cast<int>(todo.size())));
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  summary.executed = todo.size();

  for (auto& row : rows) summary.rows.push_back(std::move(*row));
  summary.results_csv = out / "results.csv";
  write_file_atomically(summary.results_csv, render_results_csv(summary.rows));
  write_file_atomically(out / "run_info.json", run_info_json(config, scenarios.size()));
  return summary;
}

std::vector<ResultRow> read_results(const std::filesystem::path& results_dir) {
  return parse_results_csv(read_file(results_dir / "results.csv"));
}

}  // namespace haggle
