#include "haggle/prompting.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "haggle/errors.hpp"
#include "haggle/protocol.hpp"

namespace haggle {

namespace {

using nlohmann::json;

const std::vector<std::string> kPlaceholders = {
    "role",   "counterpart", "title",       "description", "category",
    "listing_price", "target_price", "goal", "personality", "cot",
    "turns_remaining", "final_turn", "output_format",
};

// Collects {{name}} occurrences; throws on an unterminated opener.
std::vector<std::string> placeholders_in(std::string_view text) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = text.find("{{", pos)) != std::string_view::npos) {
    const std::size_t end = text.find("}}", pos + 2);
    if (end == std::string_view::npos) throw ConfigError("unterminated '{{' in prompt template");
    std::string name(text.substr(pos + 2, end - pos - 2));
    name.erase(0, name.find_first_not_of(' '));
    name.erase(name.find_last_not_of(' ') + 1);
    names.push_back(std::move(name));
    pos = end + 2;
  }
  return names;
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t open = text.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(text.substr(pos));
      return out;
    }
    const std::size_t close = text.find("}}", open + 2);
    if (close == std::string_view::npos) throw ConfigError("unterminated '{{' in prompt template");
    out.append(text.substr(pos, open - pos));
    std::string name(text.substr(open + 2, close - open - 2));
    name.erase(0, name.find_first_not_of(' '));
    name.erase(name.find_last_not_of(' ') + 1);
    const auto it = values.find(name);
    if (it == values.end()) throw ConfigError("unknown prompt placeholder '{{" + name + "}}'");
    out += it->second;
    pos = close + 2;
  }
}

// Empty optional sections leave runs of blank lines behind.
std::string collapse_blank_lines(const std::string& text) {
  std::string out;
  int newlines = 0;
  for (char c : text) {
    if (c == '\n') {
      if (++newlines > 2) continue;
    } else {
      newlines = 0;
    }
    out += c;
  }
  while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) out.pop_back();
  return out;
}

PromptConfig make_default() {
  PromptConfig c;
  c.version = "reconstruction-1";
  const std::string body =
      "Item: {{title}}\n"
      "Category: {{category}}\n"
      "Description: {{description}}\n"
      "Listing price: {{listing_price}}\n"
      "Your target price: {{target_price}}\n"
      "\n"
      "{{goal}}\n"
      "\n"
      "{{personality}}\n"
      "\n"
      "{{cot}}\n"
      "\n"
      "Turns remaining in this negotiation (both parties combined, including this one): "
      "{{turns_remaining}}.\n"
      "{{final_turn}}\n"
      "\n"
      "{{output_format}}\n";
  c.system_templates[Role::kBuyer] =
      "You are the buyer in a price negotiation over an item listed for sale online. "
      "You are talking to the seller.\n\n" + body;
  c.system_templates[Role::kSeller] =
      "You are the seller in a price negotiation over an item you listed for sale online. "
      "You are talking to a prospective buyer.\n\n" + body;
  c.goal =
      "Your goal is to agree on a price as close to your target price as possible. Accept "
      "reasonable offers that are close to your target price, and avoid dragging the "
      "negotiation out when an acceptable deal is on the table. Never reveal your target "
      "price. When you agree to a deal, use the accept action and state the agreed price.";
  c.personalities[Personality::kNone] = "";
  c.personalities[Personality::kAggressive] =
      "Personality: you are an aggressive negotiator. Anchor your opening offer far in your "
      "favour, concede as little as possible and only in small steps, and insist on your "
      "position when the {{counterpart}} pushes back.";
  c.personalities[Personality::kFair] =
      "Personality: you are a fair negotiator. Aim for a price that is reasonable for both "
      "sides, make proportionate concessions, and explain the reasoning behind your offers.";
  c.personalities[Personality::kPassive] =
      "Personality: you are a passive, accommodating negotiator. Be friendly, share "
      "information about the item and your situation readily, avoid confrontation, and be "
      "willing to concede to reach an agreement.";
  c.cot_directive =
      "Before choosing your action, think step by step about the state of the negotiation, "
      "the {{counterpart}}'s likely position and your best next move. Write this reasoning in "
      "the REASONING field before the ACTION field.";
  c.final_turn_warning =
      "This is the final turn. If no deal is accepted now, the negotiation ends without an "
      "agreement.";
  c.opening_message = "The negotiation is starting. You speak first.";
  return c;
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw ConfigError(std::string("prompt config: missing string field '") + key + "'");
  }
  return j.at(key).get<std::string>();
}

}  // namespace

std::string_view personality_name(Personality p) {
  switch (p) {
    case Personality::kNone: return "none";
    case Personality::kAggressive: return "aggressive";
    case Personality::kFair: return "fair";
    case Personality::kPassive: return "passive";
  }
  return "none";
}

std::optional<Personality> parse_personality(std::string_view name) {
  for (auto p : {Personality::kNone, Personality::kAggressive, Personality::kFair,
                 Personality::kPassive}) {
    if (personality_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string AgentProfile::descriptor() const {
  std::string d = model_ref + "/" + std::string(personality_name(personality));
  if (cot) d += "/cot";
  return d;
}

const std::vector<std::string>& PromptConfig::placeholders() { return kPlaceholders; }

void PromptConfig::validate() const {
  auto check = [](std::string_view text, std::string_view where) {
    for (const auto& name : placeholders_in(text)) {
      if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) == kPlaceholders.end()) {
        throw ConfigError("prompt config: unknown placeholder '{{" + name + "}}' in " +
                          std::string(where));
      }
    }
  };
  for (Role role : {Role::kBuyer, Role::kSeller}) {
    const auto it = system_templates.find(role);
    if (it == system_templates.end() || it->second.empty()) {
      throw ConfigError("prompt config: missing system template for " +
                        std::string(role_name(role)));
    }
    check(it->second, "system template");
  }
  check(goal, "goal");
  check(cot_directive, "cot_directive");
  check(final_turn_warning, "final_turn_warning");
  for (const auto& [p, text] : personalities) check(text, "personality paragraph");
}

const PromptConfig& default_prompt_config() {
  static const PromptConfig config = make_default();
  return config;
}

PromptConfig prompt_config_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("prompt config: ") + e.what());
  }
  PromptConfig c;
  c.version = require_string(j, "version");
  if (!j.contains("system_templates") || !j.at("system_templates").is_object()) {
    throw ConfigError("prompt config: missing object 'system_templates'");
  }
  for (const auto& [key, value] : j.at("system_templates").items()) {
    const auto role = parse_role(key);
    if (!role || !value.is_string()) {
      throw ConfigError("prompt config: bad system template entry '" + key + "'");
    }
    c.system_templates[*role] = value.get<std::string>();
  }
  c.goal = require_string(j, "goal");
  c.personalities[Personality::kNone] = "";
  if (j.contains("personalities")) {
    for (const auto& [key, value] : j.at("personalities").items()) {
      const auto p = parse_personality(key);
      if (!p || *p == Personality::kNone || !value.is_string()) {
        throw ConfigError("prompt config: bad personality entry '" + key + "'");
      }
      c.personalities[*p] = value.get<std::string>();
    }
  }
  c.cot_directive = require_string(j, "cot_directive");
  c.final_turn_warning = require_string(j, "final_turn_warning");
  c.opening_message = require_string(j, "opening_message");
  c.validate();
  return c;
}

PromptConfig load_prompt_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prompt config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return prompt_config_from_json(buf.str());
}

std::string prompt_config_to_json(const PromptConfig& config) {
  json j;
  j["version"] = config.version;
  for (const auto& [role, text] : config.system_templates) {
    j["system_templates"][std::string(role_name(role))] = text;
  }
  j["goal"] = config.goal;
  j["personalities"] = json::object();
  for (const auto& [p, text] : config.personalities) {
    if (p != Personality::kNone) j["personalities"][std::string(personality_name(p))] = text;
  }
  j["cot_directive"] = config.cot_directive;
  j["final_turn_warning"] = config.final_turn_warning;
  j["opening_message"] = config.opening_message;
  return j.dump(2) + "\n";
}

std::string personality_text(const PromptConfig& config, Personality personality) {
  if (personality == Personality::kNone) return "";
  const auto it = config.personalities.find(personality);
  if (it == config.personalities.end()) {
    throw ConfigError("prompt config has no paragraph for personality '" +
                      std::string(personality_name(personality)) + "'");
  }
  return it->second;
}

std::string personality_text(Personality personality) {
  return personality_text(default_prompt_config(), personality);
}

PromptBundle build_prompt(const AgentProfile& profile, const KnowledgeBase& kb,
                          std::vector<HistoryEntry> history, int turns_remaining,
                          const PromptConfig& config) {
  if (kb.role != profile.role) {
    throw std::invalid_argument("knowledge base role '" + std::string(role_name(kb.role)) +
                                "' does not match profile role '" +
                                std::string(role_name(profile.role)) + "'");
  }
  if (turns_remaining < 0) throw std::invalid_argument("turns_remaining must be >= 0");

  const std::map<std::string, std::string> role_values = {
      {"role", std::string(role_name(profile.role))},
      {"counterpart", std::string(role_name(counterpart(profile.role)))},
  };
  auto paragraph = [&](const std::string& text) { return substitute(text, role_values); };

  std::map<std::string, std::string> values = role_values;
  values["title"] = kb.title;
  values["description"] = kb.description;
  values["category"] = kb.category;
  values["listing_price"] = kb.listing_price.to_display();
  values["target_price"] = kb.target_price.to_display();
  values["goal"] = paragraph(config.goal);
  values["personality"] = paragraph(personality_text(config, profile.personality));
  values["cot"] = profile.cot ? paragraph(config.cot_directive) : "";
  values["turns_remaining"] = std::to_string(turns_remaining);
  values["final_turn"] = turns_remaining == 1 ? paragraph(config.final_turn_warning) : "";
  values["output_format"] = render_output_format(profile.cot);

  const auto it = config.system_templates.find(profile.role);
  if (it == config.system_templates.end()) {
    throw ConfigError("prompt config: missing system template for " +
                      std::string(role_name(profile.role)));
  }

  PromptBundle bundle;
  bundle.role = profile.role;
  bundle.system = collapse_blank_lines(substitute(it->second, values));
  bundle.history = std::move(history);
  bundle.turns_remaining = turns_remaining;
  bundle.opening_message = config.opening_message;
  return bundle;
}

}  // namespace haggle
