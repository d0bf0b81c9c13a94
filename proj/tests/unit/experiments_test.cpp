#include "hcfl/experiments.hpp"
#include "hcfl/scenario.hpp"
#include "hcfl/verify.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace hcfl;

namespace {

ScenarioConfig with_rounds(std::uint32_t rounds, std::uint64_t seed = 1)
{
  ScenarioConfig c;
  c.seed       = seed;
  c.num_rounds = rounds;
  return c;
}

std::size_t data_lines(const std::string& csv)
{
  std::istringstream in(csv);
  std::string        line;
  std::size_t        n = 0;
  std::getline(in, line);
  while (std::getline(in, line))
    n += !line.empty();
  return n;
}

}  // namespace

TEST(Scenario, DefaultsRoundTrip)
{
  ScenarioConfig const c;
  EXPECT_EQ(parse_scenario(scenario_to_json(c)), c);
}

TEST(Scenario, MinimalDocumentGivesDefaults)
{
  auto const c = parse_scenario(json{{"schema", "hcfl-scenario/1"}});
  EXPECT_EQ(c, ScenarioConfig{});
  EXPECT_EQ(c.num_owners, 10u);
  EXPECT_EQ(c.owner_mean, Money{100});
}

TEST(Scenario, UnknownKeyRejected)
{
  EXPECT_THROW(parse_scenario(json{{"schema", "hcfl-scenario/1"}, {"num_owner", 3}}), ScenarioError);
  EXPECT_THROW(parse_scenario(json{{"schema", "hcfl-scenario/1"}, {"payment", {{"alocation", "equal"}}}}),
               ScenarioError);
}

TEST(Scenario, SchemaTagRequired)
{
  EXPECT_THROW(parse_scenario(json{{"num_owners", 3}}), ScenarioError);
  EXPECT_THROW(parse_scenario(json{{"schema", "hcfl-scenario/2"}}), ScenarioError);
}

TEST(Scenario, PaymentPolicyParsed)
{
  auto const c = parse_scenario(json::parse(R"({
    "schema": "hcfl-scenario/1",
    "payment": {"policy": "capability", "cm_rule": "uniform", "weights": {"O0": 3, "O1": 1}}
  })"));
  auto const* cap = std::get_if<CapabilityAllocation>(&c.policy.allocation);
  ASSERT_NE(cap, nullptr);
  EXPECT_EQ(cap->weights.at(owner(0)), 3);
  EXPECT_TRUE(std::holds_alternative<SeededUniformRule>(c.policy.cm_rule));
}

TEST(Scenario, InvalidValuesRejected)
{
  EXPECT_THROW(parse_scenario(json{{"schema", "hcfl-scenario/1"}, {"num_owners", 0}}), ScenarioError);
  EXPECT_THROW(parse_scenario(json{{"schema", "hcfl-scenario/1"}, {"owner_mean", "-5"}}), ScenarioError);
}

TEST(Scenario, BundledFilesLoad)
{
  for (auto const* path : {"scenarios/default.json", "scenarios/smoke.json"})
  {
    std::ifstream probe(path);
    if (!probe)
      continue;
    EXPECT_NO_THROW(load_scenario(path)) << path;
  }
}

TEST(UtilityExperiment, DefaultRowCount)
{
  ScenarioConfig c;
  c.seed       = 3;
  auto const r = run_experiment_utility(c);
  EXPECT_EQ(r.rows.size(), 200u);
  EXPECT_EQ(data_lines(to_csv(r.rows)), 200u);
}

TEST(UtilityExperiment, OneRoundTwoRows)
{
  EXPECT_EQ(run_experiment_utility(with_rounds(1)).rows.size(), 2u);
}

TEST(UtilityExperiment, HonestLiarMatchesTruthful)
{
  auto c      = with_rounds(30, 8);
  c.dishonest = Dishonest{0.0, 0.5};
  auto const r = run_experiment_utility(c);
  EXPECT_EQ(r.truthful_total, r.dishonest_total);
  for (std::size_t i = 0; i + 1 < r.rows.size(); i += 2)
    EXPECT_EQ(r.rows[i].accumulated, r.rows[i + 1].accumulated);
}

TEST(UtilityExperiment, CsvIsByteIdenticalPerSeed)
{
  auto const a = to_csv(run_experiment_utility(with_rounds(15, 4)).rows);
  auto const b = to_csv(run_experiment_utility(with_rounds(15, 4)).rows);
  auto const c = to_csv(run_experiment_utility(with_rounds(15, 5)).rows);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.substr(0, a.find('\n')), "round,strategy,utility,accumulated_utility");
}

TEST(UtilityExperiment, LogsReplay)
{
  auto const r = run_experiment_utility(with_rounds(10, 2));
  ASSERT_EQ(r.runs.size(), 2u);
  for (auto const& run : r.runs)
  {
    EXPECT_EQ(replay(run.log).digest(), run.live_digest) << run.name;
    for (auto const& s : run.settlements)
      EXPECT_TRUE(verify_budget_balance(s));
  }
}

TEST(SocialExperiment, DefaultRowCount)
{
  ScenarioConfig c;
  c.seed       = 3;
  auto const r = run_experiment_social(c);
  EXPECT_EQ(r.rows.size(), 30u);
  EXPECT_EQ(r.final_accumulated.size(), 3u);
}

TEST(SocialExperiment, SingleStrategy)
{
  ScenarioConfig c;
  c.social_strategies = {SocialStrategy::Vcg};
  EXPECT_EQ(run_experiment_social(c).rows.size(), 10u);
}

TEST(SocialExperiment, CsvRoundTripsThroughSchema)
{
  auto const csv = to_csv(run_experiment_social(with_rounds(4)).rows);
  std::istringstream in(csv);
  std::string        line;
  std::getline(in, line);
  EXPECT_EQ(line, "round,strategy,social_utility,accumulated_social_utility");
  while (std::getline(in, line))
  {
    std::istringstream fields(line);
    std::string        round, strategy, value, acc;
    ASSERT_TRUE(std::getline(fields, round, ','));
    ASSERT_TRUE(std::getline(fields, strategy, ','));
    ASSERT_TRUE(std::getline(fields, value, ','));
    ASSERT_TRUE(std::getline(fields, acc));
    EXPECT_NO_THROW(std::stoul(round));
    EXPECT_TRUE(strategy == "vcg" || strategy == "selfish" || strategy == "random") << strategy;
    EXPECT_NO_THROW(std::stod(value));
    EXPECT_NO_THROW(std::stod(acc));
  }
}

TEST(LabelMarket, IntersectionIsSharedByEveryOwner)
{
  ScenarioConfig const c;
  for (std::uint64_t round = 0; round < 20; ++round)
  {
    auto const lm = generate_label_market(c, round);
    ASSERT_FALSE(lm.intersection.empty());
    EXPECT_GE(lm.intersection.size(), c.intersection.min_size);
    EXPECT_LE(lm.intersection.size(), c.intersection.max_size);
    for (auto const& interest : lm.interests)
      for (auto l : lm.intersection)
        EXPECT_TRUE(interest.contains(l));
  }
}

TEST(AccuracyExperiment, RowsCoverIntersectionLabels)
{
  auto const r = run_experiment_accuracy(with_rounds(3));
  ASSERT_FALSE(r.rows.empty());
  for (auto const& row : r.rows)
  {
    EXPECT_TRUE(row.strategy == "vcg" || row.strategy == "random");
    EXPECT_GE(row.accuracy, 0.0);
    EXPECT_LE(row.accuracy, 0.9);
  }
  auto const csv = to_csv(r.rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "round,strategy,label,accuracy");
}

TEST(AccuracyExperiment, ZeroBudgetZeroAccuracy)
{
  auto c                  = with_rounds(3);
  c.accuracy.total_budget = 0;
  auto const r            = run_experiment_accuracy(c);
  for (auto const& row : r.rows)
    EXPECT_EQ(row.accuracy, 0.0);
}

TEST(AccuracyExperiment, FullIntersectionSpreadsBudgetOverEveryLabel)
{
  auto c         = with_rounds(5);
  c.intersection = {10, 10, 0.0};
  auto const r   = run_experiment_accuracy(c);
  EXPECT_NEAR(r.vcg_mean, AccuracyModel{}.accuracy(1000), 1e-9);
}

TEST(Verify, SmallMatrixReportsEveryCheck)
{
  ScenarioConfig c;
  c.seed                 = 1;
  c.verify.instances     = 40;
  c.verify.budget_seeds  = 1;
  VerifyOptions o;
  o.sweep_rounds         = 3;
  auto const r           = run_verify(c, o);
  EXPECT_EQ(r.instances, 40u);
  EXPECT_EQ(r.agreement_failures, 0u);
  EXPECT_EQ(r.budget_violations, 0u);
  EXPECT_EQ(r.replay_mismatches, 0u);
  EXPECT_EQ(r.case_inequality_failures, 0u);
  EXPECT_EQ(r.lines.size(), 40u);
  EXPECT_NE(summarize(r).find("budget balance: PASS"), std::string::npos);
}

TEST(Verify, TaxSignMutationIsCaught)
{
  ScenarioConfig c;
  c.verify.instances    = 40;
  c.verify.budget_seeds = 0;
  VerifyOptions o;
  o.pipeline.flip_tax_sign = true;
  auto const r             = run_verify(c, o);
  EXPECT_GT(r.agreement_failures, 0u);
  EXPECT_NE(r.exit_code() & 2, 0);
}

TEST(Verify, EmptyMatrixWarns)
{
  ScenarioConfig c;
  c.verify.instances    = 0;
  c.verify.budget_seeds = 0;
  auto const r          = run_verify(c);
  EXPECT_EQ(r.exit_code(), 0);
  ASSERT_EQ(r.warnings.size(), 1u);
}
