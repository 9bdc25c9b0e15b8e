#include "haggle/metrics.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace haggle::metrics {

namespace {

void require_spread(double seller_target, double buyer_target) {
  if (seller_target == buyer_target) {
    throw std::invalid_argument("seller and buyer targets coincide; target spread is zero");
  }
}

std::vector<Money> prices_of(const std::vector<Turn>& turns, const Role* speaker) {
  std::vector<Money> prices;
  for (const Turn& t : turns) {
    if (t.price && (!speaker || t.speaker == *speaker)) prices.push_back(*t.price);
  }
  return prices;
}

void accumulate(std::optional<Mean>& slot, const std::optional<double>& value) {
  if (!value) return;
  if (!slot) slot = Mean{};
  slot->value += *value;
  ++slot->count;
}

void finish(std::optional<Mean>& slot) {
  if (slot) slot->value /= static_cast<double>(slot->count);
}

}  // namespace

double fairness(double accepted, double seller_target, double buyer_target) {
  require_spread(seller_target, buyer_target);
  return 1.0 - std::abs(2.0 * accepted - (seller_target + buyer_target)) / (seller_target - buyer_target);
}

double bias(double accepted, double seller_target, double buyer_target) {
  require_spread(seller_target, buyer_target);
  return 2.0 * std::abs(seller_target - accepted) / (seller_target - buyer_target) - 1.0;
}

double aggressiveness(double accepted, double listing) {
  if (!(listing > 0.0)) throw std::invalid_argument("listing price must be positive");
  return std::abs(accepted - listing) / listing;
}

double fairness(Money accepted, Money seller_target, Money buyer_target) {
  const std::int64_t s = seller_target.cents(), b = buyer_target.cents();
  if (s == b) require_spread(0.0, 0.0);
  return 1.0 - static_cast<double>(std::llabs(2 * accepted.cents() - (s + b))) / static_cast<double>(s - b);
}

double bias(Money accepted, Money seller_target, Money buyer_target) {
  const std::int64_t s = seller_target.cents(), b = buyer_target.cents();
  if (s == b) require_spread(0.0, 0.0);
  return 2.0 * static_cast<double>(std::llabs(s - accepted.cents())) / static_cast<double>(s - b) - 1.0;
}

double aggressiveness(Money accepted, Money listing) {
  if (listing.cents() <= 0) throw std::invalid_argument("listing price must be positive");
  return static_cast<double>(std::llabs(accepted.cents() - listing.cents())) /
         static_cast<double>(listing.cents());
}

double concession_rate(std::span<const Money> prices, int dialogue_length) {
  if (dialogue_length < 1) throw std::invalid_argument("dialogue length must be >= 1");
  std::int64_t moved = 0;
  for (std::size_t i = 1; i < prices.size(); ++i) {
    moved += std::llabs(prices[i].cents() - prices[i - 1].cents());
  }
  return static_cast<double>(moved) / 100.0 / dialogue_length;
}

double concession_rate(const std::vector<Turn>& turns) {
  const auto prices = prices_of(turns, nullptr);
  return concession_rate(prices, static_cast<int>(turns.size()));
}

double concession_rate(const std::vector<Turn>& turns, Role speaker) {
  const auto prices = prices_of(turns, &speaker);
  return concession_rate(prices, static_cast<int>(turns.size()));
}

RunMetrics core_metrics(const NegotiationRun& run) {
  RunMetrics m;
  m.dialogue_length = run.dialogue_length();
  m.accepted = run.outcome == Outcome::kAccepted && run.agreed_price.has_value();
  if (m.accepted) {
    const Money accepted = *run.agreed_price;
    const Money seller_target = run.scenario.seller_target;
    const Money buyer_target = run.scenario.buyer_target;
    m.fairness = fairness(accepted, seller_target, buyer_target);
    m.bias = bias(accepted, seller_target, buyer_target);
    m.aggressiveness = aggressiveness(accepted, run.scenario.listing_price);
  }
  if (m.dialogue_length >= 1) {
    m.concession_rate = concession_rate(run.turns);
    m.buyer_concession_rate = concession_rate(run.turns, Role::kBuyer);
    m.seller_concession_rate = concession_rate(run.turns, Role::kSeller);
  }
  return m;
}

RunMetrics derived_ratios(const NegotiationRun& run, RunMetrics core) {
  const int length = core.dialogue_length;
  if (length < 1) return core;
  const double n = static_cast<double>(length);
  if (core.fairness) core.relative_efficiency = *core.fairness / n;
  if (core.bias) core.bias_cond_length = *core.bias / n;
  int inquiries = 0;
  for (const Turn& t : run.turns) inquiries += t.act == DialogueAct::kInquire;
  core.probing_ratio = inquiries / n;
  return core;
}

RunMetrics compute(const NegotiationRun& run) { return derived_ratios(run, core_metrics(run)); }

AggregateMetrics aggregate(std::span<const RunMetrics> runs) {
  if (runs.empty()) throw std::invalid_argument("cannot aggregate an empty run set");
  AggregateMetrics a;
  a.run_count = runs.size();
  for (const RunMetrics& m : runs) {
    a.accepted_count += m.accepted;
    if (m.dialogue_length >= 1) accumulate(a.dialogue_length, static_cast<double>(m.dialogue_length));
    accumulate(a.fairness, m.fairness);
    accumulate(a.aggressiveness, m.aggressiveness);
    accumulate(a.bias, m.bias);
    accumulate(a.bias_cond_length, m.bias_cond_length);
    accumulate(a.relative_efficiency, m.relative_efficiency);
    accumulate(a.concession_rate, m.concession_rate);
    accumulate(a.buyer_concession_rate, m.buyer_concession_rate);
    accumulate(a.seller_concession_rate, m.seller_concession_rate);
    accumulate(a.probing_ratio, m.probing_ratio);
  }
  a.agreement_rate = static_cast<double>(a.accepted_count) / static_cast<double>(a.run_count);
  for (auto* slot : {&a.dialogue_length, &a.fairness, &a.aggressiveness, &a.bias,
                     &a.bias_cond_length, &a.relative_efficiency, &a.concession_rate,
                     &a.buyer_concession_rate, &a.seller_concession_rate, &a.probing_ratio}) {
    finish(*slot);
  }
  return a;
}

}  // namespace haggle::metrics
