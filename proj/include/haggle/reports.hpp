#pragma once

// Report tables over sweep results. Every report renders to an aligned text
// table and to JSON; absent values render as "-" and null respectively.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "haggle/metrics.hpp"
#include "haggle/protocol.hpp"
#include "haggle/results.hpp"
#include "haggle/runner.hpp"

namespace haggle::reports {

struct AgreementCell {
  std::string combination;
  std::size_t runs = 0;
  std::size_t accepted = 0;
  double rate = 0.0;  // accepted / runs
};

// One cell per combination in first-seen order. Throws std::invalid_argument
// on an empty row set.
std::vector<AgreementCell> report_agreement_matrix(const std::vector<ResultRow>& rows);

struct ComparisonLine {
  std::string metric;
  std::optional<metrics::Mean> with_cot;
  std::optional<metrics::Mean> without_cot;
};

struct CotComparison {
  std::size_t runs_with_cot = 0;
  std::size_t runs_without_cot = 0;
  // Aggressiveness, Bias, Dialogue Length, Fairness, Concession Rate,
  // Probing Ratio, Relative Efficiency.
  std::vector<ComparisonLine> lines;
};

// Rows are split by ResultRow::cot(). An empty partition leaves its column
// absent.
CotComparison report_cot_comparison(const std::vector<ResultRow>& rows);

struct ActionHistogram {
  std::string combination;
  std::size_t runs = 0;
  std::size_t turns = 0;
  std::array<std::size_t, kAllActs.size()> counts{};  // indexed like kAllActs

  double share(DialogueAct act) const;
};

struct ActionDistribution {
  std::vector<ActionHistogram> combinations;  // first-seen order
  std::vector<std::string> warnings;          // rows skipped for a missing transcript
};

// Reads each row's transcript relative to results_dir.
ActionDistribution report_action_distribution(const std::vector<ResultRow>& rows,
                                              const std::filesystem::path& results_dir);
ActionDistribution report_action_distribution(const std::vector<NegotiationRun>& runs);

struct PriceSeries {
  std::string combination;
  // means[k] is the mean price at turn k + 1 over runs with a price there.
  std::vector<std::optional<double>> means;
  std::vector<std::size_t> counts;
};

struct PriceProgression {
  std::size_t max_turn = 0;
  std::vector<PriceSeries> combinations;  // first-seen order
};

PriceProgression report_price_progression(const std::vector<NegotiationRun>& runs);

// Loads the transcripts referenced by rows; missing files are reported in
// warnings and skipped.
std::vector<NegotiationRun> load_row_transcripts(const std::vector<ResultRow>& rows,
                                                 const std::filesystem::path& results_dir,
                                                 std::vector<std::string>* warnings = nullptr);

std::string render_text(const std::vector<AgreementCell>& matrix);
std::string render_text(const CotComparison& comparison);
std::string render_text(const ActionDistribution& distribution);
std::string render_text(const PriceProgression& progression);

std::string render_json(const std::vector<AgreementCell>& matrix);
std::string render_json(const CotComparison& comparison);
std::string render_json(const ActionDistribution& distribution);
std::string render_json(const PriceProgression& progression);

}  // namespace haggle::reports
