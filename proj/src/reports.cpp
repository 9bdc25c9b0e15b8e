#include "haggle/reports.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "haggle/errors.hpp"
#include "haggle/transcript.hpp"

namespace haggle::reports {

namespace {

using nlohmann::ordered_json;

std::size_t act_index(DialogueAct act) {
  return static_cast<std::size_t>(std::find(kAllActs.begin(), kAllActs.end(), act) - kAllActs.begin());
}

// Keeps first-seen order of keys.
template <typename T>
T& slot(std::vector<T>& items, std::map<std::string, std::size_t>& index, const std::string& key) {
  const auto [it, inserted] = index.emplace(key, items.size());
  if (inserted) {
    items.emplace_back();
    items.back().combination = key;
  }
  return items[it->second];
}

std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string fmt(const std::optional<double>& v, int precision = 4) {
  return v ? fixed(*v, precision) : "-";
}

std::string fmt(const std::optional<metrics::Mean>& m) {
  return m ? fixed(m->value, 4) : "-";
}

// Columns are left-aligned for the first column and right-aligned elsewhere.
std::string table(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    const auto& row = cells[r];
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
    }
  }
  return out;
}

ordered_json mean_json(const std::optional<metrics::Mean>& m) {
  if (!m) return nullptr;
  return ordered_json{{"mean", m->value}, {"count", m->count}};
}

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

void add_run(ActionHistogram& h, const NegotiationRun& run) {
  ++h.runs;
  for (const Turn& t : run.turns) {
    ++h.counts[act_index(t.act)];
    ++h.turns;
  }
}

}  // namespace

std::vector<AgreementCell> report_agreement_matrix(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("agreement matrix needs at least one row");
  std::vector<AgreementCell> cells;
  std::map<std::string, std::size_t> index;
  for (const ResultRow& row : rows) {
    AgreementCell& cell = slot(cells, index, row.combination);
    ++cell.runs;
    cell.accepted += row.metrics.accepted;
  }
  for (AgreementCell& cell : cells) {
    cell.rate = static_cast<double>(cell.accepted) / static_cast<double>(cell.runs);
  }
  return cells;
}

CotComparison report_cot_comparison(const std::vector<ResultRow>& rows) {
  std::vector<metrics::RunMetrics> with, without;
  for (const ResultRow& row : rows) (row.cot() ? with : without).push_back(row.metrics);

  CotComparison out;
  out.runs_with_cot = with.size();
  out.runs_without_cot = without.size();
  std::optional<metrics::AggregateMetrics> a, b;
  if (!with.empty()) a = metrics::aggregate(with);
  if (!without.empty()) b = metrics::aggregate(without);

  using Field = std::optional<metrics::Mean> metrics::AggregateMetrics::*;
  const std::pair<const char*, Field> fields[] = {
      {"Aggressiveness", &metrics::AggregateMetrics::aggressiveness},
      {"Bias", &metrics::AggregateMetrics::bias},
      {"Dialogue Length", &metrics::AggregateMetrics::dialogue_length},
      {"Fairness", &metrics::AggregateMetrics::fairness},
      {"Concession Rate", &metrics::AggregateMetrics::concession_rate},
      {"Probing Ratio", &metrics::AggregateMetrics::probing_ratio},
      {"Relative Efficiency", &metrics::AggregateMetrics::relative_efficiency},
  };
  for (const auto& [name, field] : fields) {
    ComparisonLine line;
    line.metric = name;
    if (a) line.with_cot = (*a).*field;
    if (b) line.without_cot = (*b).*field;
    out.lines.push_back(std::move(line));
  }
  return out;
}

double ActionHistogram::share(DialogueAct act) const {
  if (turns == 0) return 0.0;
  return static_cast<double>(counts[act_index(act)]) / static_cast<double>(turns);
}

std::vector<NegotiationRun> load_row_transcripts(const std::vector<ResultRow>& rows,
                                                 const std::filesystem::path& results_dir,
                                                 std::vector<std::string>* warnings) {
  std::vector<NegotiationRun> runs;
  for (const ResultRow& row : rows) {
    const auto path = results_dir / row.transcript;
    std::string problem;
    if (row.transcript.empty()) {
      problem = "no transcript reference";
    } else {
      try {
        auto loaded = read_transcripts(path);
        if (loaded.empty()) {
          problem = "empty transcript " + path.string();
        } else {
          runs.push_back(std::move(loaded.front()));
        }
      } catch (const DataError& e) {
        problem = e.what();
      }
    }
    if (!problem.empty() && warnings) {
      warnings->push_back("skipped " + row.combination + " / " + row.scenario_id + ": " + problem);
    }
  }
  return runs;
}

ActionDistribution report_action_distribution(const std::vector<ResultRow>& rows,
                                              const std::filesystem::path& results_dir) {
  std::vector<std::string> warnings;
  const auto runs = load_row_transcripts(rows, results_dir, &warnings);
  ActionDistribution out = report_action_distribution(runs);
  out.warnings = std::move(warnings);
  return out;
}

ActionDistribution report_action_distribution(const std::vector<NegotiationRun>& runs) {
  ActionDistribution out;
  std::map<std::string, std::size_t> index;
  for (const NegotiationRun& run : runs) {
    add_run(slot(out.combinations, index, combination_label(run.buyer, run.seller)), run);
  }
  return out;
}

PriceProgression report_price_progression(const std::vector<NegotiationRun>& runs) {
  PriceProgression out;
  std::map<std::string, std::size_t> index;
  std::vector<std::vector<long double>> sums;
  for (const NegotiationRun& run : runs) {
    PriceSeries& series = slot(out.combinations, index, combination_label(run.buyer, run.seller));
    const std::size_t k = index.at(series.combination);
    if (sums.size() <= k) sums.resize(k + 1);
    for (std::size_t t = 0; t < run.turns.size(); ++t) {
      out.max_turn = std::max(out.max_turn, t + 1);
      if (!run.turns[t].price) continue;
      if (series.counts.size() <= t) series.counts.resize(t + 1, 0);
      if (sums[k].size() <= t) sums[k].resize(t + 1, 0.0L);
      ++series.counts[t];
      sums[k][t] += static_cast<long double>(run.turns[t].price->cents());
    }
  }
  for (std::size_t k = 0; k < out.combinations.size(); ++k) {
    PriceSeries& series = out.combinations[k];
    series.counts.resize(out.max_turn, 0);
    series.means.assign(out.max_turn, std::nullopt);
    for (std::size_t t = 0; t < out.max_turn; ++t) {
      if (series.counts[t] == 0) continue;
      series.means[t] = static_cast<double>(sums[k][t] / series.counts[t] / 100.0L);
    }
  }
  return out;
}

std::string render_text(const std::vector<AgreementCell>& matrix) {
  std::vector<std::vector<std::string>> cells = {{"Combination", "Accepted", "Runs", "Agreement"}};
  for (const auto& c : matrix) {
    cells.push_back({c.combination, std::to_string(c.accepted), std::to_string(c.runs),
                     fixed(c.rate, 4)});
  }
  return table(cells);
}

std::string render_text(const CotComparison& comparison) {
  std::vector<std::vector<std::string>> cells = {{"Metric", "With CoT", "Without CoT"}};
  for (const auto& line : comparison.lines) {
    cells.push_back({line.metric, fmt(line.with_cot), fmt(line.without_cot)});
  }
  cells.push_back({"Runs", std::to_string(comparison.runs_with_cot),
                   std::to_string(comparison.runs_without_cot)});
  return table(cells);
}

std::string render_text(const ActionDistribution& distribution) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Combination", "Turns"};
  for (DialogueAct act : kAllActs) header.emplace_back(act_label(act));
  cells.push_back(std::move(header));
  for (const auto& h : distribution.combinations) {
    std::vector<std::string> row = {h.combination, std::to_string(h.turns)};
    for (DialogueAct act : kAllActs) row.push_back(fixed(h.share(act), 3));
    cells.push_back(std::move(row));
  }
  std::string out = table(cells);
  for (const auto& w : distribution.warnings) out += "warning: " + w + "\n";
  return out;
}

std::string render_text(const PriceProgression& progression) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"Combination"};
  for (std::size_t t = 1; t <= progression.max_turn; ++t) header.push_back("t" + std::to_string(t));
  cells.push_back(std::move(header));
  for (const auto& s : progression.combinations) {
    std::vector<std::string> row = {s.combination};
    for (const auto& m : s.means) row.push_back(fmt(m, 2));
    cells.push_back(std::move(row));
  }
  return table(cells);
}

std::string render_json(const std::vector<AgreementCell>& matrix) {
  ordered_json j = ordered_json::array();
  for (const auto& c : matrix) {
    j.push_back({{"combination", c.combination},
                 {"accepted", c.accepted},
                 {"runs", c.runs},
                 {"agreement_rate", c.rate}});
  }
  return j.dump(2) + "\n";
}

std::string render_json(const CotComparison& comparison) {
  ordered_json lines = ordered_json::array();
  for (const auto& line : comparison.lines) {
    lines.push_back({{"metric", line.metric},
                     {"with_cot", mean_json(line.with_cot)},
                     {"without_cot", mean_json(line.without_cot)}});
  }
  ordered_json j = {{"runs_with_cot", comparison.runs_with_cot},
                    {"runs_without_cot", comparison.runs_without_cot},
                    {"metrics", std::move(lines)}};
  return j.dump(2) + "\n";
}

std::string render_json(const ActionDistribution& distribution) {
  ordered_json combos = ordered_json::array();
  for (const auto& h : distribution.combinations) {
    ordered_json counts = ordered_json::object();
    ordered_json shares = ordered_json::object();
    for (DialogueAct act : kAllActs) {
      const std::string label(act_label(act));
      counts[label] = h.counts[act_index(act)];
      shares[label] = h.share(act);
    }
    combos.push_back({{"combination", h.combination},
                      {"runs", h.runs},
                      {"turns", h.turns},
                      {"counts", std::move(counts)},
                      {"shares", std::move(shares)}});
  }
  ordered_json j = {{"combinations", std::move(combos)}, {"warnings", distribution.warnings}};
  return j.dump(2) + "\n";
}

std::string render_json(const PriceProgression& progression) {
  ordered_json combos = ordered_json::array();
  for (const auto& s : progression.combinations) {
    ordered_json means = ordered_json::array();
    for (const auto& m : s.means) means.push_back(opt_json(m));
    combos.push_back({{"combination", s.combination}, {"mean_price", std::move(means)},
                      {"counts", s.counts}});
  }
  ordered_json j = {{"max_turn", progression.max_turn}, {"combinations", std::move(combos)}};
  return j.dump(2) + "\n";
}

}  // namespace haggle::reports
