#include "hcfl/codec.hpp"
#include "hcfl/experiments.hpp"
#include "hcfl/ledger.hpp"
#include "hcfl/scenario.hpp"
#include "hcfl/verify.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace hcfl;

namespace {

struct Common
{
  std::string                  config_path;
  std::optional<std::uint64_t> seed;
  std::string                  out_dir;
};

ScenarioConfig load(const Common& c)
{
  ScenarioConfig cfg = c.config_path.empty() ? ScenarioConfig{} : load_scenario(c.config_path);
  if (c.seed)
    cfg.seed = *c.seed;
  return cfg;
}

void add_common(CLI::App* app, Common& c)
{
  app->add_option("--config", c.config_path, "Scenario file (schema hcfl-scenario/1)")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "Global seed; overrides the scenario");
  app->add_option("--out", c.out_dir, "Output directory for CSV, logs and reports");
}

// Bid file: {"models": [0, 1], "bids": {"O1": {"0": "100", "1": "30"}, ...}}
// with an optional "truth" table of the same shape for utilities.
int cmd_auction(const Common& common, const std::string& bid_file)
{
  auto const    cfg = load(common);
  std::ifstream in(bid_file);
  if (!in)
    throw std::runtime_error("cannot open bid file " + bid_file);
  auto const j = json::parse(in);
  for (auto const& [k, _] : j.items())
    if (k != "models" && k != "bids" && k != "truth")
      throw std::runtime_error("bid file: unknown key '" + k + "'");

  auto const models = j.at("models").get<std::vector<ModelId>>();
  auto const bids   = j.at("bids").get<BidProfile>();
  bids.require_complete(models);

  auto const policy  = effective_policy(cfg);
  auto const outcome = run_auction(bids, models, make_payment_fn(policy, 0));
  auto const roster  = bids.participants();

  json result{{"outcome", outcome}};
  if (outcome.selected)
  {
    auto const s = settle_round(outcome, policy, roster, RecyclePool{});
    result["settlement"]   = s;
    result["budget_balanced"] = verify_budget_balance(s);
  }
  if (j.contains("truth"))
  {
    auto const truth = j.at("truth").get<BidProfile>().reinterpret_as<ValuationTag>();
    json       u     = json::object();
    for (auto const& p : roster)
      u[p.to_string()] = utility(p, outcome, truth);
    result["utility"] = u;
  }
  auto const text = result.dump(2);
  std::cout << text << "\n";
  if (!common.out_dir.empty())
  {
    std::filesystem::create_directories(common.out_dir);
    std::ofstream(std::filesystem::path(common.out_dir) / "auction.json") << text << "\n";
  }
  return 0;
}

int cmd_simulate(const Common& common, const std::string& which)
{
  auto const cfg = load(common);
  auto const dir = std::filesystem::path(common.out_dir.empty() ? "out" : common.out_dir);

  auto run_one = [&](const std::string& name) {
    if (name == "utility")
    {
      auto r = run_experiment_utility(cfg);
      write_outputs(dir, "utility", to_csv(r.rows), r.runs);
      std::cout << "utility: accumulated truthful " << r.truthful_total << ", dishonest " << r.dishonest_total
                << "\n";
    }
    else if (name == "accuracy")
    {
      auto r = run_experiment_accuracy(cfg);
      write_outputs(dir, "accuracy", to_csv(r.rows), r.runs);
      std::cout << "accuracy: mean intersection accuracy vcg " << r.vcg_mean << ", random " << r.random_mean
                << "\n";
    }
    else if (name == "social")
    {
      auto r = run_experiment_social(cfg);
      write_outputs(dir, "social", to_csv(r.rows), r.runs);
      std::cout << "social: accumulated";
      for (auto const& [s, v] : r.final_accumulated)
        std::cout << " " << to_string(s) << "=" << v;
      std::cout << "\n";
    }
    else
      throw CLI::ValidationError("experiment", "unknown experiment '" + name + "'");
  };

  if (which == "all")
    for (auto const* n : {"utility", "accuracy", "social"})
      run_one(n);
  else
    run_one(which);
  std::cout << "wrote outputs to " << dir.string() << "\n";
  return 0;
}

int cmd_verify(const Common& common, bool mutate, std::optional<std::uint32_t> instances,
               std::optional<std::uint32_t> budget_seeds)
{
  auto cfg = load(common);
  if (instances)
    cfg.verify.instances = *instances;
  if (budget_seeds)
    cfg.verify.budget_seeds = *budget_seeds;

  VerifyOptions opts;
  opts.pipeline.flip_tax_sign = mutate;
  if (mutate)
    std::cout << "mutation injected: tax sign flipped\n";
  auto const report = run_verify(cfg, opts);

  if (!common.out_dir.empty())
  {
    std::filesystem::create_directories(common.out_dir);
    std::ofstream f(std::filesystem::path(common.out_dir) / "verify_report.jsonl");
    for (auto const& line : report.lines)
      f << line << "\n";
  }
  else
  {
    for (auto const& line : report.lines)
      if (line.find("\"truth\"") != std::string::npos)
        std::cout << line << "\n";
  }
  std::cout << summarize(report);
  return report.exit_code();
}

int cmd_replay(const std::string& path, const std::string& expect)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open log " + path);
  auto const log = read_event_log(in);
  try
  {
    auto const state  = replay(log);
    auto const digest = to_hex(state.digest());
    std::cout << "events: " << log.size() << "\nround: " << state.round << "\nphase: " << to_string(state.phase)
              << "\ndigest: " << digest << "\n";
    if (!expect.empty() && expect != digest)
    {
      std::cerr << "digest mismatch: expected " << expect << "\n";
      return 1;
    }
    return 0;
  }
  catch (const ChainError& e)
  {
    std::cerr << "tampered log: first bad event " << e.sequence << " (" << e.what() << ")\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Two-sided Clarke-tax crowdfunding auction simulator"};
  app.require_subcommand(1);

  Common common;

  auto*       auction = app.add_subcommand("auction", "One-shot auction from a bid file");
  std::string bid_file;
  auction->add_option("bidfile", bid_file, "JSON bid file")->required()->check(CLI::ExistingFile);
  add_common(auction, common);

  auto*       simulate = app.add_subcommand("simulate", "Run an experiment: utility, accuracy, social or all");
  std::string experiment;
  simulate->add_option("experiment", experiment, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"utility", "accuracy", "social", "all"}));
  add_common(simulate, common);

  auto*                        verify = app.add_subcommand("verify", "Run the verification matrix");
  bool                         mutate = false;
  std::optional<std::uint32_t> instances, budget_seeds;
  verify->add_flag("--mutate-tax-sign", mutate, "Self-test: flip the sign of every Clarke tax");
  verify->add_option("--instances", instances, "Override the number of random instances");
  verify->add_option("--budget-seeds", budget_seeds, "Override the number of experiment seeds in the sweep");
  add_common(verify, common);

  auto*       replay_cmd = app.add_subcommand("replay", "Verify and replay an event log");
  std::string log_path, expect;
  replay_cmd->add_option("logfile", log_path, "Event log")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--expect-digest", expect, "Fail unless the replayed state has this digest");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*auction)
      return cmd_auction(common, bid_file);
    if (*simulate)
      return cmd_simulate(common, experiment);
    if (*verify)
      return cmd_verify(common, mutate, instances, budget_seeds);
    if (*replay_cmd)
      return cmd_replay(log_path, expect);
  }
  catch (const CLI::Error& e)
  {
    return app.exit(e);
  }
  catch (const std::exception& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
