#include "haggle/runner.hpp"

#include <chrono>
#include <stdexcept>

namespace haggle {

std::string_view outcome_name(Outcome outcome) {
  return outcome == Outcome::kAccepted ? "accepted" : "rejected";
}

std::optional<Money> resolve_agreed_price(const std::vector<Turn>& turns) {
  if (turns.empty() || turns.back().act != DialogueAct::kAccept) {
    throw std::invalid_argument("resolve_agreed_price: final turn is not an accept");
  }
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->price) return it->price;
  }
  return std::nullopt;
}

NegotiationRun run_negotiation(const Scenario& scenario, const AgentProfile& buyer_profile,
                               Agent& buyer, const AgentProfile& seller_profile, Agent& seller,
                               const RunOptions& options) {
  if (buyer_profile.role != Role::kBuyer || seller_profile.role != Role::kSeller) {
    throw std::invalid_argument("run_negotiation: profiles must be a buyer and a seller");
  }
  if (options.max_turns < 1) throw std::invalid_argument("run_negotiation: max_turns must be >= 1");
  const PromptConfig& prompts = options.prompts ? *options.prompts : default_prompt_config();
  const auto started = std::chrono::steady_clock::now();

  NegotiationRun run;
  run.scenario = scenario;
  run.buyer = buyer_profile;
  run.seller = seller_profile;

  const auto [buyer_kb, seller_kb] = build_knowledge_bases(scenario);
  std::vector<HistoryEntry> history;

  for (int index = 1; index <= options.max_turns; ++index) {
    const bool buyer_turn = index % 2 == 1;
    const AgentProfile& profile = buyer_turn ? buyer_profile : seller_profile;
    const KnowledgeBase& kb = buyer_turn ? buyer_kb : seller_kb;
    Agent& agent = buyer_turn ? buyer : seller;

    const PromptBundle prompt =
        build_prompt(profile, kb, history, options.max_turns - (index - 1), prompts);

    Turn turn;
    try {
      turn = parse_turn(agent.respond(prompt, kb), profile.role, profile.cot, index);
    } catch (const BackendError& e) {
      run.failure = RunFailure{index, profile.role, std::string(failure_kind_name(e.kind())),
                               e.attempts(), e.what()};
      break;
    } catch (const ParseError& e) {
      run.failure = RunFailure{index, profile.role, "parse", 0, e.what()};
      break;
    }

    history.push_back({turn.speaker, turn.utterance});
    run.turns.push_back(std::move(turn));

    if (run.turns.back().act == DialogueAct::kAccept) {
      if (auto price = resolve_agreed_price(run.turns)) {
        run.outcome = Outcome::kAccepted;
        run.agreed_price = price;
      } else {
        run.diagnostic = "accept at turn " + std::to_string(index) +
                         " but no price was mentioned in the run; counted as rejected";
      }
      break;
    }
  }

  if (options.record_timing) {
    run.elapsed_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - started)
                         .count();
  }
  return run;
}

}  // namespace haggle
