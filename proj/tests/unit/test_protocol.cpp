#include <doctest.h>

#include <random>

#include "haggle/protocol.hpp"

using namespace haggle;

namespace {

std::optional<double> price(std::string_view s) {
  const auto m = extract_price(s);
  if (!m) return std::nullopt;
  return m->to_double();
}

std::string random_text(std::mt19937_64& rng, std::size_t max_len, std::string_view alphabet) {
  std::string out;
  const std::size_t len = rng() % (max_len + 1);
  for (std::size_t i = 0; i < len; ++i) out += alphabet[rng() % alphabet.size()];
  return out;
}

}  // namespace

TEST_CASE("act labels") {
  CHECK(act_label(DialogueAct::kInitPrice) == "init-price");
  CHECK(act_label(DialogueAct::kCounterPrice) == "counter-price");
  CHECK(parse_act("Counter_Price") == DialogueAct::kCounterPrice);
  CHECK(parse_act("INIT PRICE") == DialogueAct::kInitPrice);
  CHECK(parse_act(" accept. ") == DialogueAct::kAccept);
  CHECK(parse_act("haggle") == DialogueAct::kUnknown);
  CHECK(parse_act("") == DialogueAct::kUnknown);
  for (DialogueAct act : kAllActs) CHECK(parse_act(act_label(act)) == act);
}

TEST_CASE("output format instructions") {
  const std::string plain = render_output_format(false);
  const std::string cot = render_output_format(true);
  CHECK(plain.find("ACTION:") != std::string::npos);
  CHECK(plain.find("UTTERANCE:") != std::string::npos);
  CHECK(plain.find("REASONING") == std::string::npos);
  CHECK(cot.find("REASONING:") != std::string::npos);
  CHECK(cot.find("REASONING:") < cot.find("ACTION:"));
  for (DialogueAct act : kAllActs) {
    CHECK(plain.find(std::string(act_label(act))) != std::string::npos);
  }
}

TEST_CASE("parse_turn examples") {
  SUBCASE("counter-price") {
    const Turn t = parse_turn("ACTION: counter-price\nUTTERANCE: I can do $8.50", Role::kSeller, false, 4);
    CHECK(t.act == DialogueAct::kCounterPrice);
    CHECK(t.utterance == "I can do $8.50");
    CHECK(t.price == Money::from_cents(850));
    CHECK(t.index == 4);
    CHECK(t.speaker == Role::kSeller);
    CHECK_FALSE(t.reasoning);
  }
  SUBCASE("unknown act keeps the utterance") {
    const Turn t = parse_turn("ACTION: haggle\nUTTERANCE: deal?", Role::kBuyer, false, 1);
    CHECK(t.act == DialogueAct::kUnknown);
    CHECK(t.utterance == "deal?");
    CHECK_FALSE(t.price);
  }
  SUBCASE("chain-of-thought") {
    const Turn t = parse_turn("REASONING: low-ball first\nACTION: init-price\nUTTERANCE: Would you take $5?",
                              Role::kBuyer, true, 1);
    CHECK(t.act == DialogueAct::kInitPrice);
    CHECK(t.reasoning == "low-ball first");
    CHECK(t.price == Money::from_cents(500));
  }
  SUBCASE("reasoning is dropped for agents without chain-of-thought") {
    const Turn t = parse_turn("REASONING: hmm\nACTION: inquire\nUTTERANCE: Is it new?", Role::kBuyer, false, 1);
    CHECK_FALSE(t.reasoning);
    CHECK(t.act == DialogueAct::kInquire);
  }
  SUBCASE("free text becomes an unknown turn") {
    const Turn t = parse_turn("  Sure, I'll pay 40 for it.  ", Role::kBuyer, false, 3);
    CHECK(t.act == DialogueAct::kUnknown);
    CHECK(t.utterance == "Sure, I'll pay 40 for it.");
    CHECK(t.price == Money::from_cents(4000));
  }
  SUBCASE("markdown styling and continuation lines") {
    const Turn t = parse_turn("**Action:** offer\n**Utterance:** How about $12?\nIt has a scratch.",
                              Role::kBuyer, false, 1);
    CHECK(t.act == DialogueAct::kOffer);
    CHECK(t.utterance == "How about $12?\nIt has a scratch.");
  }
  SUBCASE("blank input is the only error") {
    CHECK_THROWS_AS(parse_turn("", Role::kBuyer, false, 1), ParseError);
    CHECK_THROWS_AS(parse_turn(" \n\t ", Role::kBuyer, false, 1), ParseError);
  }
}

TEST_CASE("extract_price") {
  CHECK(price("I'll meet you at $8.") == 8.0);
  CHECK_FALSE(price("That sounds great"));
  CHECK(price("Would you be willing to consider a price of $10 or $11?") == 10.0);
  CHECK(price("a price of $10 or $11?") == 10.0);
  CHECK(price("It's $1,200.50 firm") == 1200.50);
  CHECK(price("$ 45 is my limit") == 45.0);
  CHECK(price("I can do 7") == 7.0);
  CHECK(price("I can do 7, but I have to pay you $1 of that.") == 1.0);
  CHECK(price("Would you go 30?") == 30.0);
  CHECK(price("I'd pay 45 tops") == 45.0);
  CHECK_FALSE(price("45 would do"));
  CHECK(price("$8.125 then") == 8.13);
  CHECK_FALSE(price("I have 2 kids"));
  CHECK_FALSE(price("I can do 20% off"));
  CHECK_FALSE(price("It fits a 29er"));
  CHECK_FALSE(price("do, 7"));
  CHECK_FALSE(price("$"));
}

TEST_CASE("serialize then parse is the identity for every act") {
  std::mt19937_64 rng(17);
  const std::string alphabet = "abcXYZ $0123456789.,:*-_!?'\"#>\t";
  int checked = 0;
  for (DialogueAct act : kAllActs) {
    for (int round = 0; round < 300; ++round) {
      Turn t;
      t.index = round + 1;
      t.speaker = round % 2 ? Role::kSeller : Role::kBuyer;
      t.act = act;
      std::string u = random_text(rng, 40, alphabet);
      // Utterances are stored trimmed and non-empty.
      while (!u.empty() && (u.front() == ' ' || u.front() == '\t')) u.erase(0, 1);
      while (!u.empty() && (u.back() == ' ' || u.back() == '\t')) u.pop_back();
      if (u.empty()) u = "ok";
      t.utterance = u;
      const bool cot = round % 3 == 0;
      if (cot) t.reasoning = "think " + std::to_string(round);
      t.price = extract_price(t.utterance);
      const Turn back = parse_turn(serialize_turn(t), t.speaker, cot, t.index);
      CAPTURE(t.utterance);
      REQUIRE(back == t);
      ++checked;
    }
  }
  CHECK(checked == 11 * 300);
}

TEST_CASE("parse_turn is total over fuzzed input") {
  std::mt19937_64 rng(23);
  const std::string alphabet =
      "ACTIONUTERNSGacionutersg:*-_#> \n\r\t$0123456789.,%'\"\x01\xff";
  int parsed = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::string raw = random_text(rng, 120, alphabet);
    try {
      const Turn t = parse_turn(raw, Role::kBuyer, i % 2 == 0, 1);
      REQUIRE_FALSE(t.utterance.empty());
      ++parsed;
    } catch (const ParseError&) {
      bool blank = true;
      for (unsigned char c : raw) blank = blank && std::isspace(c);
      REQUIRE(blank);
    }
  }
  CHECK(parsed > 9000);
}

TEST_CASE("extract_price is unaffected by a sentence prepended to it") {
  std::mt19937_64 rng(29);
  const std::string alphabet = "abc dopaygmetfr $0123456789.,%?!";
  const std::vector<std::string> prefixes = {"Hello there. ", "Nice bike! ", "Well? ", "Thanks. "};
  for (int i = 0; i < 3000; ++i) {
    const std::string s = random_text(rng, 40, alphabet);
    for (const auto& p : prefixes) {
      CAPTURE(s);
      REQUIRE(extract_price(p + s) == extract_price(s));
    }
  }
}
