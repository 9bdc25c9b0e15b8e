#include "haggle/results.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "haggle/csv.hpp"
#include "haggle/errors.hpp"

namespace haggle {

namespace {

const std::vector<std::string> kColumns = {
    "scenario_id",      "combination",         "buyer",
    "buyer_profile",    "buyer_cot",           "seller",
    "seller_profile",   "seller_cot",          "outcome",
    "agreed_price",     "listing_price",       "buyer_target",
    "seller_target",    "dialogue_length",     "fairness",
    "aggressiveness",   "bias",                "bias_cond_length",
    "concession_rate",  "buyer_concession_rate", "seller_concession_rate",
    "relative_efficiency", "probing_ratio",    "failure",
    "transcript",
};

std::string opt_double(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

std::optional<double> parse_opt_double(const std::string& s, const char* column) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError(std::string("results: bad number in column '") + column + "': '" + s + "'");
  }
  return value;
}

Money parse_money(const std::string& s, const char* column) {
  auto m = Money::parse(s);
  if (!m) throw DataError(std::string("results: bad amount in column '") + column + "': '" + s + "'");
  return *m;
}

bool parse_bool(const std::string& s, const char* column) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw DataError(std::string("results: bad flag in column '") + column + "': '" + s + "'");
}

}  // namespace

const std::vector<std::string>& result_columns() { return kColumns; }

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string combination_label(const AgentProfile& buyer, const AgentProfile& seller) {
  return buyer.name + " + " + seller.name;
}

ResultRow make_result_row(const NegotiationRun& run, std::string transcript_ref) {
  ResultRow row;
  row.scenario_id = run.scenario.id;
  row.combination = combination_label(run.buyer, run.seller);
  row.buyer = run.buyer.name;
  row.buyer_profile = run.buyer.descriptor();
  row.buyer_cot = run.buyer.cot;
  row.seller = run.seller.name;
  row.seller_profile = run.seller.descriptor();
  row.seller_cot = run.seller.cot;
  row.outcome = run.outcome;
  row.agreed_price = run.agreed_price;
  row.listing_price = run.scenario.listing_price;
  row.buyer_target = run.scenario.buyer_target;
  row.seller_target = run.scenario.seller_target;
  row.metrics = metrics::compute(run);
  if (run.failure) {
    row.failure = run.failure->kind + " at turn " + std::to_string(run.failure->turn) + ": " +
                  run.failure->message;
  } else if (run.diagnostic) {
    row.failure = "no_price: " + *run.diagnostic;
  }
  row.transcript = std::move(transcript_ref);
  return row;
}

std::vector<std::string> row_fields(const ResultRow& row) {
  const auto& m = row.metrics;
  return {
      row.scenario_id,
      row.combination,
      row.buyer,
      row.buyer_profile,
      row.buyer_cot ? "true" : "false",
      row.seller,
      row.seller_profile,
      row.seller_cot ? "true" : "false",
      std::string(outcome_name(row.outcome)),
      row.agreed_price ? row.agreed_price->to_string() : "",
      row.listing_price.to_string(),
      row.buyer_target.to_string(),
      row.seller_target.to_string(),
      std::to_string(m.dialogue_length),
      opt_double(m.fairness),
      opt_double(m.aggressiveness),
      opt_double(m.bias),
      opt_double(m.bias_cond_length),
      opt_double(m.concession_rate),
      opt_double(m.buyer_concession_rate),
      opt_double(m.seller_concession_rate),
      opt_double(m.relative_efficiency),
      opt_double(m.probing_ratio),
      row.failure,
      row.transcript,
  };
}

ResultRow row_from_fields(const std::vector<std::string>& f) {
  if (f.size() != kColumns.size()) {
    throw DataError("results: expected " + std::to_string(kColumns.size()) + " fields, got " +
                    std::to_string(f.size()));
  }
  ResultRow row;
  std::size_t i = 0;
  row.scenario_id = f[i++];
  row.combination = f[i++];
  row.buyer = f[i++];
  row.buyer_profile = f[i++];
  row.buyer_cot = parse_bool(f[i++], "buyer_cot");
  row.seller = f[i++];
  row.seller_profile = f[i++];
  row.seller_cot = parse_bool(f[i++], "seller_cot");
  const std::string& outcome = f[i++];
  if (outcome != "accepted" && outcome != "rejected") {
    throw DataError("results: bad outcome '" + outcome + "'");
  }
  row.outcome = outcome == "accepted" ? Outcome::kAccepted : Outcome::kRejected;
  if (!f[i].empty()) row.agreed_price = parse_money(f[i], "agreed_price");
  ++i;
  row.listing_price = parse_money(f[i++], "listing_price");
  row.buyer_target = parse_money(f[i++], "buyer_target");
  row.seller_target = parse_money(f[i++], "seller_target");

  auto& m = row.metrics;
  const auto length = parse_opt_double(f[i++], "dialogue_length");
  if (!length || *length < 0 || std::floor(*length) != *length) {
    throw DataError("results: bad dialogue_length");
  }
  m.dialogue_length = static_cast<int>(*length);
  m.accepted = row.outcome == Outcome::kAccepted && row.agreed_price.has_value();
  m.fairness = parse_opt_double(f[i++], "fairness");
  m.aggressiveness = parse_opt_double(f[i++], "aggressiveness");
  m.bias = parse_opt_double(f[i++], "bias");
  m.bias_cond_length = parse_opt_double(f[i++], "bias_cond_length");
  m.concession_rate = parse_opt_double(f[i++], "concession_rate");
  m.buyer_concession_rate = parse_opt_double(f[i++], "buyer_concession_rate");
  m.seller_concession_rate = parse_opt_double(f[i++], "seller_concession_rate");
  m.relative_efficiency = parse_opt_double(f[i++], "relative_efficiency");
  m.probing_ratio = parse_opt_double(f[i++], "probing_ratio");
  row.failure = f[i++];
  row.transcript = f[i++];
  return row;
}

std::string render_results_csv(const std::vector<ResultRow>& rows) {
  std::string out = csv::render_record(kColumns);
  for (const auto& row : rows) out += csv::render_record(row_fields(row));
  return out;
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  const auto records = csv::parse(text);
  if (records.empty() || records.front() != kColumns) {
    throw DataError("results: header does not match results schema version " +
                    std::string(kResultsSchemaVersion));
  }
  std::vector<ResultRow> rows;
  rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) rows.push_back(row_from_fields(records[r]));
  return rows;
}

}  // namespace haggle
