// haggle: run negotiations, sweeps and reports from a sweep config.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "haggle/errors.hpp"
#include "haggle/reports.hpp"
#include "haggle/sweep.hpp"
#include "haggle/transcript.hpp"

namespace {

using namespace haggle;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> scenarios;
  std::optional<std::size_t> sample_size;
  std::optional<std::string> out;
  std::optional<int> parallel;
  std::optional<int> max_turns;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "Scenario sampling seed");
  cmd->add_option("--scenarios", o.scenarios, "Scenario file (overrides the config)");
  cmd->add_option("--sample-size", o.sample_size, "Number of scenarios to sample");
  cmd->add_option("--max-turns", o.max_turns, "Turn limit per negotiation");
}

SweepConfig load_with_overrides(const std::string& path, const Overrides& o) {
  SweepConfig config = load_sweep_config(path);
  if (o.seed) config.seed = *o.seed;
  if (o.scenarios) config.scenario_source = *o.scenarios;
  if (o.sample_size) config.sample_size = *o.sample_size;
  if (o.out) config.output_dir = *o.out;
  if (o.parallel) config.parallel = *o.parallel;
  if (o.max_turns) config.max_turns = *o.max_turns;
  config.validate();
  return config;
}

void print_issues(const std::vector<LoadIssue>& issues) {
  for (const auto& issue : issues) {
    std::cerr << (issue.severity == LoadIssue::Severity::kRejected ? "rejected" : "skipped")
              << " record " << issue.record;
    if (!issue.id.empty()) std::cerr << " (" << issue.id << ")";
    std::cerr << ": " << issue.reason << "\n";
  }
}

const AgentProfile& find_profile(const std::vector<AgentProfile>& profiles, const std::string& name,
                                 const char* role) {
  const auto it = std::find_if(profiles.begin(), profiles.end(),
                               [&](const AgentProfile& p) { return p.name == name; });
  if (it == profiles.end()) throw ConfigError(std::string("no ") + role + " profile named '" + name + "'");
  return *it;
}

void print_run(const NegotiationRun& run) {
  std::cout << "scenario " << run.scenario.id << ": " << run.scenario.title << " (listed at "
            << run.scenario.listing_price.to_display() << ")\n";
  for (const Turn& t : run.turns) {
    std::cout << "[" << t.index << "] " << role_name(t.speaker) << " <" << act_label(t.act) << "> "
              << t.utterance << "\n";
  }
  std::cout << "outcome: " << outcome_name(run.outcome);
  if (run.agreed_price) std::cout << " at " << run.agreed_price->to_display();
  std::cout << " after " << run.dialogue_length() << " turns\n";
  if (run.failure) {
    std::cout << "failure: " << run.failure->kind << " at turn " << run.failure->turn << ": "
              << run.failure->message << "\n";
  }
  if (run.diagnostic) std::cout << "note: " << *run.diagnostic << "\n";
}

int cmd_run(const std::string& config_path, const Overrides& o, const std::string& buyer_name,
            const std::string& seller_name, const std::optional<std::string>& scenario_id,
            const std::optional<std::string>& transcript_out) {
  const SweepConfig config = load_with_overrides(config_path, o);
  std::vector<LoadIssue> issues;
  const auto scenarios = load_sweep_scenarios(config, &issues);
  const Scenario* scenario = &scenarios.front();
  if (scenario_id) {
    const auto it = std::find_if(scenarios.begin(), scenarios.end(),
                                 [&](const Scenario& s) { return s.id == *scenario_id; });
    if (it == scenarios.end()) throw ConfigError("scenario '" + *scenario_id + "' is not in the sample");
    scenario = &*it;
  }
  const AgentProfile& buyer_profile = find_profile(config.buyers, buyer_name, "buyer");
  const AgentProfile& seller_profile = find_profile(config.sellers, seller_name, "seller");
  const AgentFactory factory(config);
  const auto buyer = factory.make(buyer_profile);
  const auto seller = factory.make(seller_profile);
  RunOptions options;
  options.max_turns = config.max_turns;
  options.prompts = &config.prompts;
  const NegotiationRun run =
      run_negotiation(*scenario, buyer_profile, *buyer, seller_profile, *seller, options);
  print_run(run);
  if (transcript_out) write_transcript(*transcript_out, run);
  return run.failure ? 1 : 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& o, bool resume) {
  const SweepConfig config = load_with_overrides(config_path, o);
  SweepOptions options;
  options.resume = resume;
  const SweepSummary summary = run_sweep(config, options);
  print_issues(summary.load_issues);
  std::size_t failed = 0;
  for (const auto& row : summary.rows) failed += !row.failure.empty();
  std::cout << summary.rows.size() << " rows (" << summary.executed << " run, " << summary.resumed
            << " resumed, " << failed << " with failures) -> " << summary.results_csv.string()
            << "\n";
  return 0;
}

int cmd_report(const std::string& results_dir, const std::string& kind, const std::string& format) {
  const auto rows = read_results(results_dir);
  const bool json = format == "json";
  auto emit = [&](const auto& report) {
    std::cout << (json ? reports::render_json(report) : reports::render_text(report));
  };
  const bool all = kind == "all";
  auto heading = [&](const char* title) {
    if (all && !json) std::cout << "\n" << title << "\n\n";
  };
  if (all || kind == "agreement") {
    heading("Agreement rate");
    emit(reports::report_agreement_matrix(rows));
  }
  if (all || kind == "cot") {
    heading("With and without chain-of-thought");
    emit(reports::report_cot_comparison(rows));
  }
  if (all || kind == "actions") {
    heading("Dialogue act shares");
    const auto dist = reports::report_action_distribution(rows, results_dir);
    for (const auto& w : dist.warnings) std::cerr << "warning: " << w << "\n";
    emit(dist);
  }
  if (all || kind == "prices") {
    heading("Mean price by turn");
    std::vector<std::string> warnings;
    const auto runs = reports::load_row_transcripts(rows, results_dir, &warnings);
    if (kind != "all") {
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    }
    emit(reports::report_price_progression(runs));
  }
  return 0;
}

int cmd_validate(const std::string& config_path, const Overrides& o) {
  const SweepConfig config = load_with_overrides(config_path, o);
  std::vector<LoadIssue> issues;
  const auto scenarios = load_sweep_scenarios(config, &issues);
  print_issues(issues);
  std::cout << "ok: " << config.combinations().size() << " combinations x " << scenarios.size()
            << " scenarios, " << config.backends.size() << " backends, prompts "
            << config.prompts.version << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Buyer/seller negotiation harness"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides run_o, sweep_o, validate_o;

  auto* run = app.add_subcommand("run", "Run one negotiation and print the transcript");
  run->add_option("--config", config_path, "Sweep config file")->required()->check(CLI::ExistingFile);
  add_overrides(run, run_o);
  std::string buyer, seller;
  std::optional<std::string> scenario_id, transcript_out;
  run->add_option("--buyer", buyer, "Buyer profile name")->required();
  run->add_option("--seller", seller, "Seller profile name")->required();
  run->add_option("--scenario-id", scenario_id, "Scenario id (default: first sampled)");
  run->add_option("--transcript", transcript_out, "Also write the transcript as JSONL");

  auto* sweep = app.add_subcommand("sweep", "Run every combination over the sampled scenarios");
  sweep->add_option("--config", config_path, "Sweep config file")->required()->check(CLI::ExistingFile);
  add_overrides(sweep, sweep_o);
  sweep->add_option("--out", sweep_o.out, "Output directory");
  sweep->add_option("--parallel", sweep_o.parallel, "Concurrent negotiations");
  bool resume = false;
  sweep->add_flag("--resume", resume, "Skip cells already recorded in the manifest");

  auto* report = app.add_subcommand("report", "Summarize a sweep output directory");
  std::string results_dir, kind = "all", format = "text";
  report->add_option("--out", results_dir, "Sweep output directory")->required()->check(CLI::ExistingDirectory);
  report->add_option("--kind", kind, "Report to print")
      ->check(CLI::IsMember({"all", "agreement", "cot", "actions", "prices"}));
  report->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));

  auto* validate = app.add_subcommand("validate-config", "Check a sweep config and its scenarios");
  validate->add_option("--config", config_path, "Sweep config file")->required()->check(CLI::ExistingFile);
  add_overrides(validate, validate_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, run_o, buyer, seller, scenario_id, transcript_out);
    if (*sweep) return cmd_sweep(config_path, sweep_o, resume);
    if (*report) return cmd_report(results_dir, kind, format);
    if (*validate) return cmd_validate(config_path, validate_o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
