#pragma once

// Agents: an OpenAI-compatible chat-completions client and deterministic
// scripted negotiators used for offline runs and tests.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "haggle/corpus.hpp"
#include "haggle/money.hpp"
#include "haggle/prompting.hpp"

namespace haggle {

class Agent {
 public:
  virtual ~Agent() = default;
  // Raw model text in the ACTION/UTTERANCE grammar. Throws BackendError.
  virtual std::string respond(const PromptBundle& prompt, const KnowledgeBase& kb) = 0;
};

enum class FailureKind { kTimeout, kTransport, kHttpStatus, kMalformedResponse };

std::string_view failure_kind_name(FailureKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(FailureKind kind, int attempts, const std::string& what, int http_status = 0)
      : std::runtime_error(what), kind_(kind), attempts_(attempts), http_status_(http_status) {}

  FailureKind kind() const { return kind_; }
  int attempts() const { return attempts_; }
  int http_status() const { return http_status_; }

 private:
  FailureKind kind_;
  int attempts_;
  int http_status_;
};

// ---------------------------------------------------------------------------
// Remote chat completions

struct BackendConfig {
  std::string base_url;  // e.g. "http://localhost:8000/v1"
  std::string model_name;
  double temperature = 0.7;
  int max_tokens = 256;
  std::chrono::milliseconds timeout{60'000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_max{8'000};
  int max_concurrency = 4;  // in-flight requests per backend
  std::string api_key_env = "OPENAI_API_KEY";

  // Throws ConfigError.
  void validate() const;
  // Sleep before retry number `retry` (1-based): base * 2^(retry-1), capped.
  std::chrono::milliseconds backoff_for(int retry) const;
};

// Appends one JSON object per line; safe to share between threads.
class ExchangeLog {
 public:
  explicit ExchangeLog(const std::filesystem::path& path);
  void append(const std::string& json_line);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct Completion {
  std::string text;
  int attempts = 0;
};

// System prompt, then history as alternating user/assistant messages
// (own utterances are "assistant"). An empty history or one ending with our
// own utterance gets a user message so the request ends on the user side.
std::string build_chat_request(const BackendConfig& config, const PromptBundle& prompt);

// Extracts choices[0].message.content. Throws BackendError(kMalformedResponse).
std::string parse_chat_response(std::string_view body, int attempts);

class ChatBackend {
 public:
  explicit ChatBackend(BackendConfig config, std::shared_ptr<ExchangeLog> log = nullptr);

  // POST {base_url}/chat/completions with retry and exponential backoff on
  // timeouts, transport errors, 408, 429 and 5xx. At most max_retries + 1
  // attempts. Thread-safe; at most max_concurrency requests in flight.
  Completion complete(const PromptBundle& prompt) const;

  const BackendConfig& config() const { return config_; }

 private:
  class Gate {
   public:
    explicit Gate(int capacity) : free_(capacity) {}
    void acquire();
    void release();

   private:
    std::mutex mu_;
    std::condition_variable cv_;
    int free_;
  };

  BackendConfig config_;
  std::shared_ptr<ExchangeLog> log_;
  std::string host_;         // scheme://host[:port]
  std::string path_prefix_;  // "/v1"
  std::unique_ptr<Gate> gate_;
};

class RemoteAgent : public Agent {
 public:
  explicit RemoteAgent(std::shared_ptr<const ChatBackend> backend) : backend_(std::move(backend)) {}
  std::string respond(const PromptBundle& prompt, const KnowledgeBase& kb) override;

 private:
  std::shared_ptr<const ChatBackend> backend_;
};

// ---------------------------------------------------------------------------
// Scripted negotiators

struct ScriptedPolicy {
  enum class Kind { kLinearConcession, kStubborn, kAcceptBot };
  Kind kind = Kind::kLinearConcession;
  double opening_fraction = 0.5;
  double step_fraction = 0.1;
  double accept_threshold = 0.05;

  // Throws ConfigError when a fraction used by `kind` is outside (0, 1].
  void validate() const;
};

std::string_view policy_kind_name(ScriptedPolicy::Kind kind);
std::optional<ScriptedPolicy::Kind> parse_policy_kind(std::string_view name);

// What a scripted agent knows, recovered from the utterance history.
struct ScriptState {
  int own_turns = 0;                       // turns this agent already took
  std::optional<Money> counterpart_price;  // most recent priced counterpart utterance
};

ScriptState derive_state(const std::vector<HistoryEntry>& history, Role role);

// linear_concession: proposes opening_fraction x listing, then moves
// step_fraction x listing per own turn toward the counterpart (buyer up,
// seller down), staying within [0, listing]. Accepts when the counterpart's
// last price is within accept_threshold x listing of its own current price
// or already at least as good.
// stubborn: repeats opening_fraction x listing with act insist; never accepts.
// accept_bot: accepts any priced counterpart utterance, otherwise inquires.
std::string scripted_turn(const ScriptedPolicy& policy, Role role, const KnowledgeBase& kb,
                          const ScriptState& state);

class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(ScriptedPolicy policy);
  std::string respond(const PromptBundle& prompt, const KnowledgeBase& kb) override;

 private:
  ScriptedPolicy policy_;
};

}  // namespace haggle
