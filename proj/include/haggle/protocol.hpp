#pragma once

// Dialogue-act taxonomy and the line-oriented agent output grammar:
//
//   REASONING: <text>      (chain-of-thought agents only, before ACTION)
//   ACTION: <act label>
//   UTTERANCE: <text>
//
// See docs/protocol.md for the exact contract.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "haggle/money.hpp"
#include "haggle/role.hpp"

namespace haggle {

enum class DialogueAct {
  kIntro,
  kInitPrice,
  kOffer,
  kCounterPrice,
  kInsist,
  kAgree,
  kDisagree,
  kAccept,
  kInform,
  kInquire,
  kUnknown,
};

inline constexpr std::array<DialogueAct, 11> kAllActs = {
    DialogueAct::kIntro,   DialogueAct::kInitPrice, DialogueAct::kOffer,
    DialogueAct::kCounterPrice, DialogueAct::kInsist, DialogueAct::kAgree,
    DialogueAct::kDisagree, DialogueAct::kAccept,  DialogueAct::kInform,
    DialogueAct::kInquire, DialogueAct::kUnknown,
};

// Wire label, hyphenated: "init-price", "counter-price", ...
std::string_view act_label(DialogueAct act);

// Case-insensitive; '_' and ' ' are treated as '-'. Anything outside the
// closed set maps to kUnknown.
DialogueAct parse_act(std::string_view label);

struct Turn {
  int index = 0;  // 1-based
  Role speaker = Role::kBuyer;
  DialogueAct act = DialogueAct::kUnknown;
  std::string utterance;
  std::optional<std::string> reasoning;
  std::optional<Money> price;

  friend bool operator==(const Turn&, const Turn&) = default;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Instruction text naming the output fields and the act list.
std::string render_output_format(bool cot);

// Total for any non-blank input. Throws ParseError on empty/blank text only.
Turn parse_turn(std::string_view raw, Role speaker, bool cot, int index);

// Inverse of parse_turn for utterances without embedded newlines.
std::string serialize_turn(const Turn& turn);

// First "$"-marked amount; failing that, the first bare number directly
// next to a price word (do, offer, pay, price, go, meet) within the same
// clause. Rounded to cents.
std::optional<Money> extract_price(std::string_view utterance);

}  // namespace haggle
