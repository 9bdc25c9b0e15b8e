#include "haggle/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace haggle {

namespace {

constexpr std::array<std::string_view, 11> kLabels = {
    "intro",  "init-price", "offer",  "counter-price", "insist",  "agree",
    "disagree", "accept",   "inform", "inquire",       "unknown",
};

constexpr std::array<std::string_view, 6> kPriceWords = {"do", "offer", "pay", "price", "go", "meet"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

enum class Field { kNone, kAction, kUtterance, kReasoning };

// Recognizes "ACTION: x", "**Action:** x", "- utterance : x" and similar.
// Returns the field and the value start offset within `line`.
std::pair<Field, std::size_t> match_key(std::string_view line) {
  std::size_t i = 0;
  std::size_t stars = 0;
  while (i < line.size() && (is_space(line[i]) || line[i] == '*' || line[i] == '#' ||
                             line[i] == '-' || line[i] == '>')) {
    if (line[i] == '*') ++stars;
    ++i;
  }
  static constexpr std::array<std::pair<std::string_view, Field>, 3> keys = {{
      {"action", Field::kAction},
      {"utterance", Field::kUtterance},
      {"reasoning", Field::kReasoning},
  }};
  for (const auto& [name, field] : keys) {
    if (line.size() - i < name.size()) continue;
    bool same = true;
    for (std::size_t k = 0; k < name.size(); ++k) {
      if (lower(line[i + k]) != name[k]) {
        same = false;
        break;
      }
    }
    if (!same) continue;
    std::size_t j = i + name.size();
    std::size_t closing = 0;
    while (j < line.size() && (line[j] == '*' || line[j] == ' ' || line[j] == '\t')) {
      if (line[j] == '*') ++closing;
      ++j;
    }
    if (j >= line.size() || line[j] != ':') continue;
    ++j;
    // "**Action:** offer" closes its emphasis after the colon.
    for (std::size_t k = closing; k < stars && j < line.size() && line[j] == '*'; ++k) ++j;
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
    return {field, j};
  }
  return {Field::kNone, 0};
}

struct NumberSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Digits with optional three-digit comma groups and an optional fraction.
// A trailing '.' without digits is sentence punctuation, not part of the number.
NumberSpan scan_number(std::string_view s, std::size_t begin) {
  std::size_t i = begin;
  while (i < s.size() && is_digit(s[i])) ++i;
  while (i + 3 < s.size() && s[i] == ',' && is_digit(s[i + 1]) && is_digit(s[i + 2]) &&
         is_digit(s[i + 3]) && (i + 4 >= s.size() || !is_digit(s[i + 4]))) {
    i += 4;
  }
  if (i + 1 < s.size() && s[i] == '.' && is_digit(s[i + 1])) {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i;
  }
  return {begin, i};
}

std::optional<Money> to_money(std::string_view s, NumberSpan span) {
  return Money::parse(s.substr(span.begin, span.end - span.begin));
}

bool is_price_word(std::string_view s, std::size_t begin, std::size_t end) {
  if (begin >= end) return false;
  std::string word;
  for (std::size_t k = begin; k < end; ++k) word += lower(s[k]);
  return std::find(kPriceWords.begin(), kPriceWords.end(), word) != kPriceWords.end();
}

// Word immediately before `pos`, separated by spaces only.
bool price_word_before(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  while (i > 0 && (s[i - 1] == ' ' || s[i - 1] == '\t')) --i;
  if (i == pos) return false;
  const std::size_t end = i;
  while (i > 0 && (is_alpha(s[i - 1]) || s[i - 1] == '\'')) --i;
  return is_price_word(s, i, end);
}

// Word immediately after `pos`, separated by spaces only.
bool price_word_after(std::string_view s, std::size_t pos) {
  std::size_t i = pos;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  if (i == pos) return false;
  const std::size_t begin = i;
  while (i < s.size() && is_alpha(s[i])) ++i;
  return is_price_word(s, begin, i);
}

}  // namespace

std::string_view act_label(DialogueAct act) { return kLabels[static_cast<std::size_t>(act)]; }

DialogueAct parse_act(std::string_view label) {
  std::string norm;
  for (char c : trim(label)) {
    if (c == '_' || c == ' ') c = '-';
    norm += lower(c);
  }
  // Tolerate trailing punctuation such as "accept." from chatty models.
  while (!norm.empty() && (norm.back() == '.' || norm.back() == '*' || norm.back() == '"')) {
    norm.pop_back();
  }
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (norm == kLabels[i]) return kAllActs[i];
  }
  return DialogueAct::kUnknown;
}

std::string render_output_format(bool cot) {
  std::string acts;
  for (std::size_t i = 0; i < kLabels.size(); ++i) {
    if (i) acts += ", ";
    acts += kLabels[i];
  }
  std::string out = "Respond using exactly the following format, one field per line:\n";
  if (cot) out += "REASONING: <your private step-by-step reasoning; the other party never sees it>\n";
  out += "ACTION: <exactly one of: " + acts + ">\n";
  out += "UTTERANCE: <the single message you say to the other party>\n";
  out += "Do not write anything outside these fields. Mention prices as $<amount>.";
  return out;
}

Turn parse_turn(std::string_view raw, Role speaker, bool cot, int index) {
  const std::string_view whole = trim(raw);
  if (whole.empty()) throw ParseError("empty agent output");

  std::string action, utterance, reasoning;
  bool have_action = false;
  std::string* current = nullptr;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string_view line = raw.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;

    const auto [field, value_at] = match_key(line);
    const std::string_view value = line.substr(value_at);
    switch (field) {
      case Field::kAction:
        action.assign(value);
        have_action = true;
        current = &action;
        break;
      case Field::kUtterance:
        utterance.assign(value);
        current = &utterance;
        break;
      case Field::kReasoning:
        reasoning.assign(value);
        current = &reasoning;
        break;
      case Field::kNone:
        if (current) {
          *current += '\n';
          current->append(line);
        }
        break;
    }
  }

  Turn turn;
  turn.index = index;
  turn.speaker = speaker;
  turn.act = have_action ? parse_act(trim(action)) : DialogueAct::kUnknown;
  const std::string_view utt = trim(utterance);
  turn.utterance = utt.empty() ? std::string(whole) : std::string(utt);
  if (cot) {
    const std::string_view why = trim(reasoning);
    if (!why.empty()) turn.reasoning = std::string(why);
  }
  turn.price = extract_price(turn.utterance);
  return turn;
}

std::string serialize_turn(const Turn& turn) {
  std::string out;
  if (turn.reasoning) out += "REASONING: " + *turn.reasoning + "\n";
  out += "ACTION: ";
  out += act_label(turn.act);
  out += "\nUTTERANCE: " + turn.utterance;
  return out;
}

std::optional<Money> extract_price(std::string_view s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '$') continue;
    std::size_t j = i + 1;
    while (j < s.size() && s[j] == ' ') ++j;
    if (j < s.size() && is_digit(s[j])) {
      if (auto m = to_money(s, scan_number(s, j))) return m;
    }
  }

  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_digit(s[i])) {
      ++i;
      continue;
    }
    const NumberSpan span = scan_number(s, i);
    i = span.end;
    const bool glued_before =
        span.begin > 0 && (is_alpha(s[span.begin - 1]) || is_digit(s[span.begin - 1]) ||
                           s[span.begin - 1] == '.' || s[span.begin - 1] == ',');
    const bool glued_after = span.end < s.size() && (is_alpha(s[span.end]) || s[span.end] == '%');
    if (glued_before || glued_after) continue;
    if (price_word_before(s, span.begin) || price_word_after(s, span.end)) {
      if (auto m = to_money(s, span)) return m;
    }
  }
  return std::nullopt;
}

}  // namespace haggle
