#include <doctest.h>

#include <random>

#include "haggle/errors.hpp"
#include "haggle/results.hpp"
#include "haggle/transcript.hpp"
#include "support.hpp"

using namespace haggle;
using namespace haggle::testing;

namespace {

std::vector<NegotiationRun> random_runs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const char* names[] = {"Plain", "Fair, \"calm\" Buyer", "Two\nlines", "Ünïcode ✓"};
  std::vector<NegotiationRun> runs;
  for (std::size_t i = 0; i < n; ++i) {
    NegotiationRun run = random_run(rng, static_cast<int>(i));
    run.buyer.name = names[i % 4];
    run.seller.personality = static_cast<Personality>(i % 4);
    run.seller.cot = i % 5 == 0;
    if (i % 7 == 0) run.failure = RunFailure{3, Role::kSeller, "timeout", 4, "no reply, gave up"};
    runs.push_back(std::move(run));
  }
  return runs;
}

}  // namespace

TEST_CASE("results CSV round trip is field-exact") {
  std::vector<ResultRow> rows;
  for (const auto& run : random_runs(400, 3)) rows.push_back(make_result_row(run, "t/" + run.scenario.id + ".jsonl"));
  const std::string text = render_results_csv(rows);
  const auto back = parse_results_csv(text);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CAPTURE(i);
    REQUIRE(back[i] == rows[i]);
  }
  CHECK(render_results_csv(back) == text);
}

TEST_CASE("aggregates from the CSV equal aggregates from memory") {
  std::vector<metrics::RunMetrics> memory, disk;
  std::vector<ResultRow> rows;
  for (const auto& run : random_runs(300, 4)) {
    memory.push_back(metrics::compute(run));
    rows.push_back(make_result_row(run, ""));
  }
  for (const auto& row : parse_results_csv(render_results_csv(rows))) disk.push_back(row.metrics);
  const auto a = metrics::aggregate(memory);
  const auto b = metrics::aggregate(disk);
  CHECK(a.agreement_rate == b.agreement_rate);
  CHECK(a.fairness->value == b.fairness->value);
  CHECK(a.bias->value == b.bias->value);
  CHECK(a.aggressiveness->value == b.aggressiveness->value);
  CHECK(a.concession_rate->value == b.concession_rate->value);
  CHECK(a.probing_ratio->value == b.probing_ratio->value);
  CHECK(a.relative_efficiency->value == b.relative_efficiency->value);
  CHECK(a.dialogue_length->value == b.dialogue_length->value);
}

TEST_CASE("result rows") {
  NegotiationRun run;
  run.scenario = make_scenario("42", 10, 5, 10);
  run.buyer = make_profile("Fair Buyer", Role::kBuyer, true, Personality::kFair);
  run.seller = make_profile("Passive Seller", Role::kSeller);
  run.turns = {{1, Role::kBuyer, DialogueAct::kInitPrice, "$6?", std::nullopt, usd(6)},
               {2, Role::kSeller, DialogueAct::kAccept, "Deal", std::nullopt, std::nullopt}};
  run.outcome = Outcome::kAccepted;
  run.agreed_price = usd(6);
  const ResultRow row = make_result_row(run, "x.jsonl");
  CHECK(row.combination == "Fair Buyer + Passive Seller");
  CHECK(row.buyer_profile == "fixture/fair/cot");
  CHECK(row.cot());
  CHECK(row.failure.empty());
  const auto fields = row_fields(row);
  REQUIRE(fields.size() == result_columns().size());
  CHECK(fields[9] == "6.00");

  run.failure = RunFailure{3, Role::kBuyer, "http_status", 1, "HTTP 401"};
  CHECK(make_result_row(run, "").failure == "http_status at turn 3: HTTP 401");
}

TEST_CASE("malformed results are rejected") {
  CHECK_THROWS_AS(parse_results_csv("a,b\n1,2\n"), DataError);
  const std::string header = render_results_csv({});
  CHECK(parse_results_csv(header).empty());
  CHECK_THROWS_AS(parse_results_csv(header + "only,three,fields\n"), DataError);
  auto fields = row_fields(make_result_row(random_runs(1, 9).front(), ""));
  fields[8] = "maybe";
  CHECK_THROWS_AS(row_from_fields(fields), DataError);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.25) == "1.25");
  CHECK(format_double(-0.4385) == "-0.4385");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    REQUIRE(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("transcripts round trip") {
  const auto dir = temp_dir("transcripts");
  auto runs = random_runs(50, 5);
  for (auto& run : runs) {
    run.diagnostic = run.turns.empty() ? std::optional<std::string>("empty") : std::nullopt;
    run.elapsed_ms = 12.5;
    if (!run.turns.empty()) run.turns.front().reasoning = "thinking, \"quoted\"\nnext line";
  }
  for (const auto& run : runs) {
    CHECK(transcript_from_json(transcript_to_json(run)) == run);
    CHECK(transcript_to_json(run).find('\n') == std::string::npos);
  }
  write_transcript(dir / "one.jsonl", runs[3]);
  const auto read = read_transcripts(dir / "one.jsonl");
  REQUIRE(read.size() == 1);
  CHECK(read.front() == runs[3]);
  CHECK_THROWS_AS(transcript_from_json("{\"schema\": \"other\"}"), DataError);
  CHECK_THROWS_AS(transcript_from_json("not json"), DataError);
}
