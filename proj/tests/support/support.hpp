#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "haggle/metrics.hpp"
#include "haggle/results.hpp"
#include "haggle/runner.hpp"
#include "haggle/transcript.hpp"

namespace haggle::testing {

inline std::filesystem::path data_dir() { return HAGGLE_TEST_DATA_DIR; }
inline std::filesystem::path source_dir() { return HAGGLE_SOURCE_DIR; }

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("haggle_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Money usd(double amount) { return Money::from_double(amount); }

inline Scenario make_scenario(std::string id, double listing, double buyer_target,
                              double seller_target) {
  Scenario s;
  s.id = std::move(id);
  s.title = "Item " + s.id;
  s.description = "A used item in good condition.";
  s.category = "misc";
  s.listing_price = usd(listing);
  s.buyer_target = usd(buyer_target);
  s.seller_target = usd(seller_target);
  return s;
}

inline AgentProfile make_profile(std::string name, Role role, bool cot = false,
                                 Personality personality = Personality::kNone) {
  AgentProfile p;
  p.name = std::move(name);
  p.role = role;
  p.cot = cot;
  p.personality = personality;
  p.model_ref = "fixture";
  return p;
}

// Random run with arbitrary acts and prices. Accepted runs end in an accept
// turn and carry an agreed price; some runs have zero turns.
inline NegotiationRun random_run(std::mt19937_64& rng, int serial) {
  auto uniform = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  NegotiationRun run;
  const std::int64_t buyer = uniform(100, 500'000);
  const std::int64_t seller = buyer + uniform(1, 500'000);
  const std::int64_t listing = uniform(100, 1'000'000);
  run.scenario.id = "r" + std::to_string(serial);
  run.scenario.listing_price = Money::from_cents(listing);
  run.scenario.buyer_target = Money::from_cents(buyer);
  run.scenario.seller_target = Money::from_cents(seller);
  run.buyer = make_profile("B", Role::kBuyer, uniform(0, 1) == 1);
  run.seller = make_profile("S", Role::kSeller);
  const int length = static_cast<int>(uniform(0, 15));
  const bool accepted = length > 0 && uniform(0, 2) > 0;
  for (int k = 1; k <= length; ++k) {
    Turn t;
    t.index = k;
    t.speaker = k % 2 ? Role::kBuyer : Role::kSeller;
    t.act = kAllActs[static_cast<std::size_t>(uniform(0, 10))];
    if (t.act == DialogueAct::kAccept) t.act = DialogueAct::kInform;
    if (uniform(0, 3) > 0) t.price = Money::from_cents(uniform(1, 2'000'000));
    if (k == length && accepted) {
      t.act = DialogueAct::kAccept;
      t.price = Money::from_cents(uniform(1, 2'000'000));
    }
    t.utterance = "turn " + std::to_string(k);
    run.turns.push_back(std::move(t));
  }
  run.outcome = accepted ? Outcome::kAccepted : Outcome::kRejected;
  if (accepted) run.agreed_price = run.turns.back().price;
  return run;
}

// Brute-force reference values, written from the metric definitions with
// integer cents and long double arithmetic and no shared code.
namespace oracle {

struct Values {
  long double fairness = NAN, bias = NAN, aggressiveness = NAN, relative_efficiency = NAN,
              bias_cond_length = NAN, concession = NAN, buyer_concession = NAN,
              seller_concession = NAN, probing = NAN;
};

inline long double moved_cents(const NegotiationRun& run, int who) {
  long double total = 0;
  bool have = false;
  std::int64_t last = 0;
  for (const Turn& t : run.turns) {
    if (!t.price) continue;
    if (who >= 0 && static_cast<int>(t.speaker) != who) continue;
    const std::int64_t c = t.price->cents();
    if (have) total += static_cast<long double>(c > last ? c - last : last - c);
    last = c;
    have = true;
  }
  return total;
}

inline Values compute(const NegotiationRun& run) {
  Values v;
  const long double n = static_cast<long double>(run.turns.size());
  if (run.outcome == Outcome::kAccepted && run.agreed_price) {
    const long double a = run.agreed_price->cents();
    const long double s = run.scenario.seller_target.cents();
    const long double b = run.scenario.buyer_target.cents();
    const long double l = run.scenario.listing_price.cents();
    const long double off_mid = std::fabs(2 * a - (s + b));  // twice the distance to midpoint
    v.fairness = 1 - off_mid / (s - b);
    v.bias = 2 * std::fabs(s - a) / (s - b) - 1;
    v.aggressiveness = std::fabs(a - l) / l;
    if (n > 0) {
      v.relative_efficiency = v.fairness / n;
      v.bias_cond_length = v.bias / n;
    }
  }
  if (n > 0) {
    v.concession = moved_cents(run, -1) / 100 / n;
    v.buyer_concession = moved_cents(run, static_cast<int>(Role::kBuyer)) / 100 / n;
    v.seller_concession = moved_cents(run, static_cast<int>(Role::kSeller)) / 100 / n;
    long double inquiries = 0;
    for (const Turn& t : run.turns) inquiries += t.act == DialogueAct::kInquire ? 1 : 0;
    v.probing = inquiries / n;
  }
  return v;
}

// Compares an optional metric with an oracle value where NaN means undefined.
inline bool same(const std::optional<double>& got, long double want, double tol) {
  if (std::isnan(static_cast<double>(want))) return !got.has_value();
  return got && std::fabs(static_cast<long double>(*got) - want) <= tol;
}

inline bool matches(const metrics::RunMetrics& m, const Values& v, double tol) {
  return same(m.fairness, v.fairness, tol) && same(m.bias, v.bias, tol) &&
         same(m.aggressiveness, v.aggressiveness, tol) &&
         same(m.relative_efficiency, v.relative_efficiency, tol) &&
         same(m.bias_cond_length, v.bias_cond_length, tol) &&
         same(m.concession_rate, v.concession, tol) &&
         same(m.buyer_concession_rate, v.buyer_concession, tol) &&
         same(m.seller_concession_rate, v.seller_concession, tol) &&
         same(m.probing_ratio, v.probing, tol);
}

}  // namespace oracle

// Result rows with the given accepted/total counts per combination.
struct CountSpec {
  std::string buyer;
  std::string seller;
  int accepted;
  int total;
};

inline std::vector<ResultRow> rows_with_counts(const std::vector<CountSpec>& specs) {
  std::vector<ResultRow> rows;
  for (const auto& spec : specs) {
    for (int i = 0; i < spec.total; ++i) {
      NegotiationRun run;
      run.scenario = make_scenario(std::to_string(i + 1), 100, 60, 100);
      run.buyer = make_profile(spec.buyer, Role::kBuyer);
      run.seller = make_profile(spec.seller, Role::kSeller);
      Turn opening{1, Role::kBuyer, DialogueAct::kInitPrice, "How about $80?", std::nullopt, usd(80)};
      run.turns.push_back(opening);
      if (i < spec.accepted) {
        run.turns.push_back({2, Role::kSeller, DialogueAct::kAccept, "Deal at $80.", std::nullopt, usd(80)});
        run.outcome = Outcome::kAccepted;
        run.agreed_price = usd(80);
      }
      rows.push_back(make_result_row(run, ""));
    }
  }
  return rows;
}

// Agreement counts for the five personality pairings whose rates are
// 0.85, 0.72, 0.78, 0.64 and 0.80.
inline std::vector<CountSpec> agreement_fixture_counts() {
  return {
      {"Aggressive Buyer", "Fair Seller", 17, 20},
      {"Aggressive Buyer", "Passive Seller", 18, 25},
      {"Fair Buyer", "Aggressive Seller", 39, 50},
      {"Passive Buyer", "Passive Seller", 16, 25},
      {"Passive Buyer", "Fair Seller", 16, 20},
  };
}

// Chain-of-thought comparison fixture turned into result rows.
inline std::vector<ResultRow> cot_fixture_rows() {
  std::vector<ResultRow> rows;
  for (const auto& run : read_transcripts(data_dir() / "cot_comparison_fixture.jsonl")) {
    rows.push_back(make_result_row(run, ""));
  }
  return rows;
}

struct ComparisonTarget {
  const char* metric;
  double with_cot;
  double without_cot;
};

inline const std::vector<ComparisonTarget>& cot_comparison_targets() {
  static const std::vector<ComparisonTarget> cells = {
      {"Aggressiveness", 0.2107, 0.1333},
      {"Bias", 1.0813, 0.1671},
      {"Dialogue Length", 10.6115, 11.5667},
      {"Fairness", -0.4385, 0.3021},
      {"Concession Rate", 184.4005, 188.9073},
      {"Probing Ratio", 0.0197, 0.0137},
      {"Relative Efficiency", 0.1406, 0.0498},
  };
  return cells;
}

// Sweep config over the bundled listings with four scripted combinations.
inline std::string scripted_sweep_json(const std::filesystem::path& out, std::size_t sample = 30,
                                       int parallel = 2) {
  std::ostringstream j;
  j << R"({
  "scenarios": {
    "source": ")" << (source_dir() / "data" / "sample_listings.jsonl").string() << R"(",
    "schema": {"title": "/items/Title/0", "description": "/items/Description/0",
               "category": "/items/Category/0", "listing_price": "/items/Price/0",
               "buyer_target": "/agent_info/Target/0", "seller_target": "/agent_info/Target/1"},
    "sample_size": )" << sample << R"(,
    "seed": 2024
  },
  "backends": {
    "linear_buyer": {"type": "scripted", "policy": "linear_concession", "opening_fraction": 0.5},
    "linear_seller": {"type": "scripted", "policy": "linear_concession", "opening_fraction": 1.0},
    "stubborn": {"type": "scripted", "policy": "stubborn", "opening_fraction": 0.6},
    "accept": {"type": "scripted", "policy": "accept_bot"}
  },
  "buyers": [{"name": "Linear Buyer", "backend": "linear_buyer"},
             {"name": "Stubborn Buyer", "backend": "stubborn"}],
  "sellers": [{"name": "Linear Seller", "backend": "linear_seller"},
              {"name": "Accepting Seller", "backend": "accept"}],
  "output_dir": ")" << out.string() << R"(",
  "parallel": )" << parallel << R"(
})";
  return j.str();
}

}  // namespace haggle::testing
