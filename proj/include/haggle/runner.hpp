#pragma once

// Turn-limited negotiation between a buyer and a seller agent.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haggle/backend.hpp"
#include "haggle/corpus.hpp"
#include "haggle/prompting.hpp"
#include "haggle/protocol.hpp"

namespace haggle {

inline constexpr int kDefaultMaxTurns = 15;

enum class Outcome { kAccepted, kRejected };

std::string_view outcome_name(Outcome outcome);

struct RunFailure {
  int turn = 0;  // turn index that failed
  Role speaker = Role::kBuyer;
  std::string kind;  // failure_kind_name() or "parse"
  int attempts = 0;
  std::string message;

  friend bool operator==(const RunFailure&, const RunFailure&) = default;
};

struct NegotiationRun {
  Scenario scenario;
  AgentProfile buyer;
  AgentProfile seller;
  std::vector<Turn> turns;
  Outcome outcome = Outcome::kRejected;
  std::optional<Money> agreed_price;
  std::optional<RunFailure> failure;
  // Set when an accept turn had no price anywhere in the run.
  std::optional<std::string> diagnostic;
  std::optional<double> elapsed_ms;

  int dialogue_length() const { return static_cast<int>(turns.size()); }

  friend bool operator==(const NegotiationRun&, const NegotiationRun&) = default;
};

struct RunOptions {
  int max_turns = kDefaultMaxTurns;
  bool record_timing = true;
  const PromptConfig* prompts = nullptr;  // default_prompt_config() when null
};

// Buyer speaks first; speakers alternate. Each agent sees its own knowledge
// base, the prior utterances and the number of turns left (max_turns minus
// turns already taken). Ends on the first accept or when max_turns turns
// have been taken. Backend and parse failures end the run as rejected with
// the failure recorded; turns completed so far are kept.
NegotiationRun run_negotiation(const Scenario& scenario, const AgentProfile& buyer_profile,
                               Agent& buyer, const AgentProfile& seller_profile, Agent& seller,
                               const RunOptions& options = {});

// Price in the final (accept) turn if it has one, else the most recent price
// from an earlier turn. nullopt when no turn carries a price.
// Throws std::invalid_argument if the last turn is not an accept.
std::optional<Money> resolve_agreed_price(const std::vector<Turn>& turns);

}  // namespace haggle
