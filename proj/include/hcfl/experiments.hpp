#pragma once

// Multi-round experiment drivers. Every VCG round goes through a Ledger so
// each run leaves a replayable event log behind.

#include "hcfl/ledger.hpp"
#include "hcfl/scenario.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hcfl {

/// One ledger's history inside an experiment.
struct LedgerRun
{
  std::string                   name;
  std::vector<Event>            log;
  Digest                        live_digest{};
  std::vector<SettlementResult> settlements;
};

struct RoundMarket
{
  std::vector<ParticipantId> roster;
  std::vector<ModelProposal> proposals;
  ValuationProfile           truth;
  BidProfile                 bids;
};

struct RoundRecord
{
  AuctionOutcome                outcome;
  std::optional<TrainingReport> report;
  SettlementResult              settlement;
};

/// Drives one full round (deposit through recycle) on `ledger`. Each
/// participant deposits max(floor · own max bid, the market's total
/// max-bid mass) so experiments never hit insolvency. Non-winning owners
/// vote to punish when the realized accuracy misses the promised one.
RoundRecord run_ledger_round(Ledger& ledger, const RoundMarket& market, const ScenarioConfig& config,
                             std::uint64_t round);

/// Payment policy with any seeded C_m rule re-keyed to the config seed.
PaymentPolicy effective_policy(const ScenarioConfig& config);

// --- utility (truthful vs. dishonest tracked owner) --------------------------

struct UtilityRow
{
  std::uint32_t round = 0;
  std::string   strategy;
  Money         utility;
  Money         accumulated;
};

struct UtilityResult
{
  std::vector<UtilityRow> rows;
  std::vector<LedgerRun>  runs;
  Money                   truthful_total;
  Money                   dishonest_total;
};

/// Paired runs on identical market randomness; only the tracked owner's
/// bids differ. Defaults to 100 rounds.
UtilityResult run_experiment_utility(const ScenarioConfig& config);

// --- accuracy on the common intersection --------------------------------------

struct AccuracyRow
{
  std::uint32_t round = 0;
  std::string   strategy;
  Label         label = 0;
  double        accuracy = 0.0;
};

struct AccuracyResult
{
  std::vector<AccuracyRow> rows;
  std::vector<LedgerRun>   runs;
  double                   vcg_mean    = 0.0;  // over all rounds and intersection labels
  double                   random_mean = 0.0;
};

/// Defaults to 10 rounds.
AccuracyResult run_experiment_accuracy(const ScenarioConfig& config);

// --- social utility under three target rules ----------------------------------

struct SocialRow
{
  std::uint32_t round = 0;
  std::string   strategy;
  double        social_utility = 0.0;
  double        accumulated    = 0.0;
};

struct SocialResult
{
  std::vector<SocialRow>                rows;
  std::vector<LedgerRun>                runs;
  std::map<SocialStrategy, double>      final_accumulated;
};

/// Defaults to 10 rounds.
SocialResult run_experiment_social(const ScenarioConfig& config);

/// Labelled market for one round: a common intersection, per-owner
/// expansions, owner proposals equal to their interest sets, additive
/// per-label magnitudes. Exposed for tests.
struct LabelMarket
{
  LabelSet                  intersection;
  std::vector<LabelSet>     interests;  // indexed by owner
  std::vector<AgentConfig>  agents;
  RoundMarket               market;
};

LabelMarket generate_label_market(const ScenarioConfig& config, std::uint64_t round);

/// True welfare of an arbitrary target set under a label market.
Money target_welfare(const LabelMarket& lm, const LabelSet& target, const ScenarioConfig& config);

// --- output --------------------------------------------------------------------

std::string to_csv(const std::vector<UtilityRow>& rows);
std::string to_csv(const std::vector<AccuracyRow>& rows);
std::string to_csv(const std::vector<SocialRow>& rows);

/// Writes `<dir>/<stem>.csv` and one `<dir>/<run>.log` per ledger run.
void write_outputs(const std::filesystem::path& dir, const std::string& stem, const std::string& csv,
                   const std::vector<LedgerRun>& runs);

}  // namespace hcfl
