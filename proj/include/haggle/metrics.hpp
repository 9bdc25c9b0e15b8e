#pragma once

// Per-run negotiation metrics and their aggregation.
//
// Price-dependent metrics (fairness, bias, aggressiveness and the ratios
// built on them) exist only for accepted runs. Means skip undefined values
// instead of counting them as zero.

#include <optional>
#include <span>
#include <vector>

#include "haggle/money.hpp"
#include "haggle/protocol.hpp"
#include "haggle/runner.hpp"

namespace haggle::metrics {

// 1 at the midpoint of the targets, 0 at either target, negative outside.
// Throws std::invalid_argument when seller_target == buyer_target.
double fairness(double accepted, double seller_target, double buyer_target);

// 2|seller_target - accepted| / (seller_target - buyer_target) - 1.
// -1 at the seller target, +1 at the buyer target. Exceeds +1 for deals
// below the buyer target, and reads as buyer-favouring above the seller
// target too because of the absolute value.
double bias(double accepted, double seller_target, double buyer_target);

// |accepted - listing| / listing. Throws when listing <= 0.
double aggressiveness(double accepted, double listing);

// Same formulas over whole cents. The numerators and denominators are exact
// integers, so the anchors (midpoint, either target, listing) come out exact.
double fairness(Money accepted, Money seller_target, Money buyer_target);
double bias(Money accepted, Money seller_target, Money buyer_target);
double aggressiveness(Money accepted, Money listing);

// Sum of absolute changes between consecutive prices over dialogue_length.
// 0 with fewer than two prices. Throws when dialogue_length < 1.
double concession_rate(std::span<const Money> prices, int dialogue_length);

// Pools the extracted prices of both agents in turn order.
double concession_rate(const std::vector<Turn>& turns);

// Same, restricted to one speaker's prices.
double concession_rate(const std::vector<Turn>& turns, Role speaker);

struct RunMetrics {
  int dialogue_length = 0;
  bool accepted = false;
  std::optional<double> fairness;
  std::optional<double> aggressiveness;
  std::optional<double> bias;
  std::optional<double> bias_cond_length;
  std::optional<double> relative_efficiency;
  // Per-turn ratios; absent only for a run that failed before its first turn.
  std::optional<double> concession_rate;
  std::optional<double> buyer_concession_rate;
  std::optional<double> seller_concession_rate;
  std::optional<double> probing_ratio;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

// Fills fairness/aggressiveness/bias (accepted runs) and the concession rates.
RunMetrics core_metrics(const NegotiationRun& run);

// relative_efficiency = fairness / length, bias_cond_length = bias / length,
// probing_ratio = inquire turns / length.
RunMetrics derived_ratios(const NegotiationRun& run, RunMetrics core);

RunMetrics compute(const NegotiationRun& run);

struct Mean {
  double value = 0.0;
  std::size_t count = 0;  // runs where the metric was defined
};

struct AggregateMetrics {
  std::size_t run_count = 0;
  std::size_t accepted_count = 0;
  double agreement_rate = 0.0;
  std::optional<Mean> dialogue_length;
  std::optional<Mean> fairness;
  std::optional<Mean> aggressiveness;
  std::optional<Mean> bias;
  std::optional<Mean> bias_cond_length;
  std::optional<Mean> relative_efficiency;
  std::optional<Mean> concession_rate;
  std::optional<Mean> buyer_concession_rate;
  std::optional<Mean> seller_concession_rate;
  std::optional<Mean> probing_ratio;
};

// Throws std::invalid_argument on an empty set.
AggregateMetrics aggregate(std::span<const RunMetrics> runs);

}  // namespace haggle::metrics
