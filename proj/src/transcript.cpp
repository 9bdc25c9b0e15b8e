#include "haggle/transcript.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "haggle/errors.hpp"

namespace haggle {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json money_json(const std::optional<Money>& m) {
  return m ? ordered_json(m->to_string()) : ordered_json(nullptr);
}

Money money_from(const json& j, const char* what) {
  if (!j.is_string()) throw DataError(std::string("transcript: '") + what + "' is not a string");
  auto m = Money::parse(j.get<std::string>());
  if (!m) throw DataError(std::string("transcript: bad amount in '") + what + "'");
  return *m;
}

std::optional<Money> optional_money(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return money_from(j.at(key), key);
}

ordered_json profile_json(const AgentProfile& p) {
  return {{"name", p.name},
          {"role", role_name(p.role)},
          {"personality", personality_name(p.personality)},
          {"cot", p.cot},
          {"model_ref", p.model_ref}};
}

AgentProfile profile_from(const json& j) {
  AgentProfile p;
  p.name = j.at("name").get<std::string>();
  const auto role = parse_role(j.at("role").get<std::string>());
  const auto personality = parse_personality(j.at("personality").get<std::string>());
  if (!role || !personality) throw DataError("transcript: bad profile");
  p.role = *role;
  p.personality = *personality;
  p.cot = j.at("cot").get<bool>();
  p.model_ref = j.at("model_ref").get<std::string>();
  return p;
}

}  // namespace

std::string transcript_to_json(const NegotiationRun& run) {
  ordered_json j;
  j["schema"] = kTranscriptSchema;
  const Scenario& s = run.scenario;
  j["scenario"] = {{"id", s.id},
                   {"title", s.title},
                   {"description", s.description},
                   {"category", s.category},
                   {"listing_price", s.listing_price.to_string()},
                   {"buyer_target", s.buyer_target.to_string()},
                   {"seller_target", s.seller_target.to_string()}};
  j["buyer"] = profile_json(run.buyer);
  j["seller"] = profile_json(run.seller);
  ordered_json turns = ordered_json::array();
  for (const Turn& t : run.turns) {
    turns.push_back({{"index", t.index},
                     {"speaker", role_name(t.speaker)},
                     {"act", act_label(t.act)},
                     {"utterance", t.utterance},
                     {"reasoning", t.reasoning ? ordered_json(*t.reasoning) : ordered_json(nullptr)},
                     {"price", money_json(t.price)}});
  }
  j["turns"] = std::move(turns);
  j["outcome"] = outcome_name(run.outcome);
  j["agreed_price"] = money_json(run.agreed_price);
  if (run.failure) {
    j["failure"] = {{"turn", run.failure->turn},
                    {"speaker", role_name(run.failure->speaker)},
                    {"kind", run.failure->kind},
                    {"attempts", run.failure->attempts},
                    {"message", run.failure->message}};
  } else {
    j["failure"] = nullptr;
  }
  j["diagnostic"] = run.diagnostic ? ordered_json(*run.diagnostic) : ordered_json(nullptr);
  if (run.elapsed_ms) j["elapsed_ms"] = *run.elapsed_ms;
  return j.dump();
}

NegotiationRun transcript_from_json(std::string_view line) {
  try {
    const json j = json::parse(line);
    if (j.value("schema", "") != kTranscriptSchema) {
      throw DataError("transcript: unsupported schema '" + j.value("schema", "") + "'");
    }
    NegotiationRun run;
    const json& s = j.at("scenario");
    run.scenario.id = s.at("id").get<std::string>();
    run.scenario.title = s.at("title").get<std::string>();
    run.scenario.description = s.at("description").get<std::string>();
    run.scenario.category = s.at("category").get<std::string>();
    run.scenario.listing_price = money_from(s.at("listing_price"), "listing_price");
    run.scenario.buyer_target = money_from(s.at("buyer_target"), "buyer_target");
    run.scenario.seller_target = money_from(s.at("seller_target"), "seller_target");
    run.buyer = profile_from(j.at("buyer"));
    run.seller = profile_from(j.at("seller"));
    for (const json& t : j.at("turns")) {
      Turn turn;
      turn.index = t.at("index").get<int>();
      const auto speaker = parse_role(t.at("speaker").get<std::string>());
      if (!speaker) throw DataError("transcript: bad speaker");
      turn.speaker = *speaker;
      turn.act = parse_act(t.at("act").get<std::string>());
      turn.utterance = t.at("utterance").get<std::string>();
      if (!t.at("reasoning").is_null()) turn.reasoning = t.at("reasoning").get<std::string>();
      turn.price = optional_money(t, "price");
      run.turns.push_back(std::move(turn));
    }
    run.outcome = j.at("outcome") == "accepted" ? Outcome::kAccepted : Outcome::kRejected;
    run.agreed_price = optional_money(j, "agreed_price");
    if (j.contains("failure") && !j.at("failure").is_null()) {
      const json& f = j.at("failure");
      RunFailure failure;
      failure.turn = f.at("turn").get<int>();
      failure.speaker = parse_role(f.at("speaker").get<std::string>()).value_or(Role::kBuyer);
      failure.kind = f.at("kind").get<std::string>();
      failure.attempts = f.at("attempts").get<int>();
      failure.message = f.at("message").get<std::string>();
      run.failure = std::move(failure);
    }
    if (j.contains("diagnostic") && !j.at("diagnostic").is_null()) {
      run.diagnostic = j.at("diagnostic").get<std::string>();
    }
    if (j.contains("elapsed_ms")) run.elapsed_ms = j.at("elapsed_ms").get<double>();
    return run;
  } catch (const json::exception& e) {
    throw DataError(std::string("transcript: ") + e.what());
  }
}

void write_transcript(const std::filesystem::path& path, const NegotiationRun& run) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write transcript '" + path.string() + "'");
  out << transcript_to_json(run) << '\n';
}

std::vector<NegotiationRun> read_transcripts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open transcript '" + path.string() + "'");
  std::vector<NegotiationRun> runs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    runs.push_back(transcript_from_json(line));
  }
  return runs;
}

}  // namespace haggle
