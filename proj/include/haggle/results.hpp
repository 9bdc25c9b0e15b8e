#pragma once

// One CSV row per negotiation run. The column set is fixed per schema
// version; see docs/results-format.md.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "haggle/metrics.hpp"
#include "haggle/runner.hpp"

namespace haggle {

inline constexpr std::string_view kResultsSchemaVersion = "1";

const std::vector<std::string>& result_columns();

struct ResultRow {
  std::string scenario_id;
  std::string combination;  // "<buyer name> + <seller name>"
  std::string buyer;
  std::string buyer_profile;  // AgentProfile::descriptor()
  bool buyer_cot = false;
  std::string seller;
  std::string seller_profile;
  bool seller_cot = false;
  Outcome outcome = Outcome::kRejected;
  std::optional<Money> agreed_price;
  Money listing_price;
  Money buyer_target;
  Money seller_target;
  metrics::RunMetrics metrics;
  std::string failure;     // "<kind> at turn N: message", empty if none
  std::string transcript;  // path relative to the results directory

  // Either party prompted with chain-of-thought.
  bool cot() const { return buyer_cot || seller_cot; }

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

std::string combination_label(const AgentProfile& buyer, const AgentProfile& seller);

ResultRow make_result_row(const NegotiationRun& run, std::string transcript_ref);

std::vector<std::string> row_fields(const ResultRow& row);
// Throws DataError on malformed values.
ResultRow row_from_fields(const std::vector<std::string>& fields);

// Header plus one line per row.
std::string render_results_csv(const std::vector<ResultRow>& rows);
// Throws DataError when the header differs from result_columns().
std::vector<ResultRow> parse_results_csv(std::string_view text);

// Shortest decimal spelling that reads back to the same double.
std::string format_double(double value);

}  // namespace haggle
