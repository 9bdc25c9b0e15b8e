#pragma once

// Prompt assembly for one agent turn.
//
// Prompt wording is data: a PromptConfig holds the system template and the
// paragraphs substituted into it. Templates use {{name}} placeholders; the
// recognised names are listed by PromptConfig::placeholders().

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haggle/corpus.hpp"
#include "haggle/role.hpp"

namespace haggle {

enum class Personality { kNone, kAggressive, kFair, kPassive };

std::string_view personality_name(Personality p);
std::optional<Personality> parse_personality(std::string_view name);

struct AgentProfile {
  std::string name;  // display label, e.g. "Aggressive Buyer"
  Role role = Role::kBuyer;
  Personality personality = Personality::kNone;
  bool cot = false;
  std::string model_ref;  // backend key in the sweep config

  // "model_ref/personality[/cot]", stable across runs.
  std::string descriptor() const;

  friend bool operator==(const AgentProfile&, const AgentProfile&) = default;
};

struct PromptConfig {
  std::string version;
  std::map<Role, std::string> system_templates;
  std::string goal;
  std::map<Personality, std::string> personalities;  // kNone is always empty
  std::string cot_directive;
  std::string final_turn_warning;
  // Sent as the first user message when the agent opens the conversation.
  std::string opening_message;

  static const std::vector<std::string>& placeholders();

  // Throws ConfigError for unknown placeholders or missing templates.
  void validate() const;
};

// Built-in wording. Reconstructed from behavioural descriptions, not a
// published prompt.
const PromptConfig& default_prompt_config();

PromptConfig load_prompt_config(const std::filesystem::path& path);
PromptConfig prompt_config_from_json(std::string_view json_text);
std::string prompt_config_to_json(const PromptConfig& config);

struct HistoryEntry {
  Role speaker = Role::kBuyer;
  std::string utterance;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct PromptBundle {
  Role role = Role::kBuyer;
  std::string system;
  std::vector<HistoryEntry> history;  // utterances only, oldest first
  int turns_remaining = 0;
  std::string opening_message;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

std::string personality_text(const PromptConfig& config, Personality personality);
std::string personality_text(Personality personality);

// Throws std::invalid_argument if kb.role != profile.role or turns_remaining < 0.
PromptBundle build_prompt(const AgentProfile& profile, const KnowledgeBase& kb,
                          std::vector<HistoryEntry> history, int turns_remaining,
                          const PromptConfig& config = default_prompt_config());

}  // namespace haggle
