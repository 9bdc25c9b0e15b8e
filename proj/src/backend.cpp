#include "haggle/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "haggle/errors.hpp"
#include "haggle/protocol.hpp"

namespace haggle {

namespace {

using nlohmann::json;

bool transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

struct Attempt {
  bool ok = false;
  bool retryable = false;
  FailureKind kind = FailureKind::kTransport;
  int status = 0;
  std::string body;
  std::string detail;
};

}  // namespace

std::string_view failure_kind_name(FailureKind kind) {
  switch (kind) {
    case FailureKind::kTimeout: return "timeout";
    case FailureKind::kTransport: return "transport";
    case FailureKind::kHttpStatus: return "http_status";
    case FailureKind::kMalformedResponse: return "malformed_response";
  }
  return "unknown";
}

void BackendConfig::validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw ConfigError("backend base_url must start with http:// or https://: '" + base_url + "'");
  }
  if (model_name.empty()) throw ConfigError("backend model name is empty");
  if (!(temperature >= 0.0)) throw ConfigError("backend temperature must be >= 0");
  if (max_tokens <= 0) throw ConfigError("backend max_tokens must be > 0");
  if (timeout.count() <= 0) throw ConfigError("backend timeout must be > 0");
  if (max_retries < 0) throw ConfigError("backend max_retries must be >= 0");
  if (backoff_base.count() < 0 || backoff_max < backoff_base) {
    throw ConfigError("backend backoff must satisfy 0 <= base <= max");
  }
  if (max_concurrency <= 0) throw ConfigError("backend max_concurrency must be > 0");
}

std::chrono::milliseconds BackendConfig::backoff_for(int retry) const {
  auto delay = backoff_base;
  for (int i = 1; i < retry && delay < backoff_max; ++i) delay *= 2;
  return std::min(delay, backoff_max);
}

ExchangeLog::ExchangeLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw ConfigError("cannot open exchange log '" + path.string() + "'");
}

void ExchangeLog::append(const std::string& json_line) {
  std::lock_guard lock(mu_);
  out_ << json_line << '\n';
  out_.flush();
}

std::string build_chat_request(const BackendConfig& config, const PromptBundle& prompt) {
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", prompt.system}});
  if (prompt.history.empty() || prompt.history.front().speaker == prompt.role) {
    messages.push_back({{"role", "user"}, {"content", prompt.opening_message}});
  }
  for (const auto& entry : prompt.history) {
    messages.push_back({{"role", entry.speaker == prompt.role ? "assistant" : "user"},
                        {"content", entry.utterance}});
  }
  if (messages.back()["role"] == "assistant") {
    messages.push_back({{"role", "user"}, {"content", "(It is your turn.)"}});
  }
  json body = {
      {"model", config.model_name},
      {"messages", std::move(messages)},
      {"temperature", config.temperature},
      {"max_tokens", config.max_tokens},
      {"stream", false},
  };
  return body.dump();
}

std::string parse_chat_response(std::string_view body, int attempts) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    throw BackendError(FailureKind::kMalformedResponse, attempts, "response body is not JSON");
  }
  const json::json_pointer content_ptr("/choices/0/message/content");
  if (!j.contains(content_ptr) || !j.at(content_ptr).is_string()) {
    throw BackendError(FailureKind::kMalformedResponse, attempts,
                       "response lacks choices[0].message.content");
  }
  return j.at(content_ptr).get<std::string>();
}

void ChatBackend::Gate::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void ChatBackend::Gate::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

ChatBackend::ChatBackend(BackendConfig config, std::shared_ptr<ExchangeLog> log)
    : config_(std::move(config)), log_(std::move(log)) {
  config_.validate();
  const auto scheme_end = config_.base_url.find("://") + 3;
  const auto path_start = config_.base_url.find('/', scheme_end);
  host_ = config_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  gate_ = std::make_unique<Gate>(config_.max_concurrency);
}

Completion ChatBackend::complete(const PromptBundle& prompt) const {
  const std::string request = build_chat_request(config_, prompt);
  const std::string path = path_prefix_ + "/chat/completions";

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto attempt_once = [&]() {
    Attempt a;
    httplib::Client client(host_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    gate_->acquire();
    auto res = client.Post(path, headers, request, "application/json");
    gate_->release();

    if (!res) {
      const auto err = res.error();
      a.retryable = true;
      a.kind = (err == httplib::Error::Read || err == httplib::Error::Write ||
                err == httplib::Error::ConnectionTimeout)
                   ? FailureKind::kTimeout
                   : FailureKind::kTransport;
      a.detail = httplib::to_string(err);
      return a;
    }
    a.status = res->status;
    a.body = res->body;
    if (res->status >= 200 && res->status < 300) {
      a.ok = true;
    } else {
      a.kind = FailureKind::kHttpStatus;
      a.retryable = transient_status(res->status);
      a.detail = "HTTP " + std::to_string(res->status);
    }
    return a;
  };

  const int max_attempts = config_.max_retries + 1;
  Attempt last;
  int attempts = 0;
  for (attempts = 1; attempts <= max_attempts; ++attempts) {
    last = attempt_once();
    if (last.ok || !last.retryable) break;
    if (attempts < max_attempts) std::this_thread::sleep_for(config_.backoff_for(attempts));
  }
  attempts = std::min(attempts, max_attempts);

  if (log_) {
    json entry = {{"model", config_.model_name},
                  {"request", json::parse(request)},
                  {"status", last.status},
                  {"response", last.body},
                  {"attempts", attempts}};
    if (!last.ok) entry["error"] = last.detail;
    log_->append(entry.dump());
  }

  if (!last.ok) {
    throw BackendError(last.kind, attempts,
                       std::string(failure_kind_name(last.kind)) + " after " +
                           std::to_string(attempts) + " attempt(s): " + last.detail,
                       last.status);
  }
  return {parse_chat_response(last.body, attempts), attempts};
}

std::string RemoteAgent::respond(const PromptBundle& prompt, const KnowledgeBase&) {
  return backend_->complete(prompt).text;
}

// ---------------------------------------------------------------------------

std::string_view policy_kind_name(ScriptedPolicy::Kind kind) {
  switch (kind) {
    case ScriptedPolicy::Kind::kLinearConcession: return "linear_concession";
    case ScriptedPolicy::Kind::kStubborn: return "stubborn";
    case ScriptedPolicy::Kind::kAcceptBot: return "accept_bot";
  }
  return "unknown";
}

std::optional<ScriptedPolicy::Kind> parse_policy_kind(std::string_view name) {
  for (auto k : {ScriptedPolicy::Kind::kLinearConcession, ScriptedPolicy::Kind::kStubborn,
                 ScriptedPolicy::Kind::kAcceptBot}) {
    if (policy_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

void ScriptedPolicy::validate() const {
  auto in_range = [](double v, const char* what) {
    if (!(v > 0.0 && v <= 1.0)) {
      throw ConfigError(std::string("scripted policy ") + what + " must be in (0, 1]");
    }
  };
  if (kind == Kind::kAcceptBot) return;
  in_range(opening_fraction, "opening_fraction");
  if (kind == Kind::kLinearConcession) {
    in_range(step_fraction, "step_fraction");
    in_range(accept_threshold, "accept_threshold");
  }
}

ScriptState derive_state(const std::vector<HistoryEntry>& history, Role role) {
  ScriptState state;
  for (const auto& entry : history) {
    if (entry.speaker == role) {
      ++state.own_turns;
    } else if (auto p = extract_price(entry.utterance)) {
      state.counterpart_price = p;
    }
  }
  return state;
}

namespace {

std::string emit(DialogueAct act, const std::string& utterance) {
  return "ACTION: " + std::string(act_label(act)) + "\nUTTERANCE: " + utterance;
}

std::int64_t fraction_of(Money amount, double fraction) {
  return static_cast<std::int64_t>(std::llround(static_cast<double>(amount.cents()) * fraction));
}

}  // namespace

std::string scripted_turn(const ScriptedPolicy& policy, Role role, const KnowledgeBase& kb,
                          const ScriptState& state) {
  const bool buyer = role == Role::kBuyer;
  const auto& counter = state.counterpart_price;

  switch (policy.kind) {
    case ScriptedPolicy::Kind::kAcceptBot:
      if (counter) return emit(DialogueAct::kAccept, "Deal, " + counter->to_display() + " works for me.");
      return emit(DialogueAct::kInquire, "What price did you have in mind?");

    case ScriptedPolicy::Kind::kStubborn: {
      const Money price = Money::from_cents(fraction_of(kb.listing_price, policy.opening_fraction));
      return emit(DialogueAct::kInsist, "My price is " + price.to_display() + ", and that's final.");
    }

    case ScriptedPolicy::Kind::kLinearConcession: {
      const std::int64_t listing = kb.listing_price.cents();
      const std::int64_t opening = fraction_of(kb.listing_price, policy.opening_fraction);
      const std::int64_t step = fraction_of(kb.listing_price, policy.step_fraction);
      const std::int64_t threshold = fraction_of(kb.listing_price, policy.accept_threshold);
      const std::int64_t direction = buyer ? 1 : -1;
      const std::int64_t current =
          std::clamp<std::int64_t>(opening + direction * state.own_turns * step, 0, listing);

      if (counter) {
        const std::int64_t c = counter->cents();
        const bool at_least_as_good = buyer ? c <= current : c >= current;
        if (at_least_as_good || std::llabs(c - current) <= threshold) {
          return emit(DialogueAct::kAccept, "Deal, " + counter->to_display() + " works for me.");
        }
      }
      const Money price = Money::from_cents(current);
      if (state.own_turns == 0 && !counter) {
        return emit(DialogueAct::kInitPrice, buyer ? "Hi! Would you take " + price.to_display() + " for it?"
                                                   : "It's in great shape. I'm asking " + price.to_display() + ".");
      }
      return emit(DialogueAct::kCounterPrice,
                  buyer ? "I can do " + price.to_display() + "." : "I could go to " + price.to_display() + ".");
    }
  }
  return emit(DialogueAct::kUnknown, "...");
}

ScriptedAgent::ScriptedAgent(ScriptedPolicy policy) : policy_(policy) { policy_.validate(); }

std::string ScriptedAgent::respond(const PromptBundle& prompt, const KnowledgeBase& kb) {
  return scripted_turn(policy_, prompt.role, kb, derive_state(prompt.history, prompt.role));
}

}  // namespace haggle
