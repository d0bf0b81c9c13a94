#pragma once

// Brute-force checks that run beside the mechanism: a dense re-implementation
// of welfare, selection, payment shares and tax, an exhaustive unilateral
// deviation search, the five-way case classifier, and a Monte-Carlo estimate
// of per-side expected utility.

#include "hcfl/mechanism.hpp"
#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"
#include "hcfl/settlement.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hcfl {

/// A desk-scale market: true magnitudes plus the bids everyone else submits.
struct Instance
{
  std::uint64_t         id = 0;
  std::vector<ModelId>  models;
  ValuationProfile      truth;
  BidProfile            bids;  // defaults to truth

  /// `bids` with participant i's row replaced by its true magnitudes.
  BidProfile truthful_for(const ParticipantId& i) const;
};

struct InstanceLimits
{
  std::uint32_t max_models   = 3;
  std::uint32_t max_owners   = 4;
  std::uint32_t max_stations = 4;
  std::int64_t  max_value    = 20;
};

/// Random instance with 1..max participants per side, 1..max models and
/// magnitudes uniform on [0, max_value]. Everyone bids truthfully.
Instance generate_instance(std::uint64_t seed, std::uint64_t id, const InstanceLimits& limits = {});

/// Inclusive integer grid of candidate bids.
struct BidGrid
{
  Money lo{0};
  Money hi{0};
  Money step{1};

  std::vector<Money> values() const;
};

/// [0, 2 · largest magnitude in the instance], step 1.
BidGrid default_grid(const Instance& instance);

enum class CaseLabel : std::uint8_t
{
  Case1,
  Case2,
  Case3,
  Case4,
  Case5,
  NoPilotNoChoice,
};

std::string_view to_string(CaseLabel c);

/// A single-entry bid change: participant's bid on `model` becomes `bid`.
struct Deviation
{
  ModelId model;
  Money   bid;
};

/// Everything the classifier looked at.
///
/// H(k) is the participant's own side's surplus under k when it bids the
/// truth: owners Σ_O b − C_k, stations C_k − Σ_B b. G(k) is the same quantity
/// with the participant's own net term removed. `m` is the model the
/// participant would push for, `m_prime` its alternative.
struct CaseEvidence
{
  CaseLabel              label = CaseLabel::NoPilotNoChoice;
  bool                   pilot = false;
  std::optional<ModelId> selected;
  std::optional<ModelId> m;
  std::optional<ModelId> m_prime;
  Money                  h_m, h_m_prime, g_m, g_m_prime;
  Money                  max_welfare;
  bool                   inequality_holds = false;
};

/// Throws InvariantError for a configuration no correct mechanism can reach.
CaseEvidence analyze_case(const Instance&                 instance,
                          const ParticipantId&            participant,
                          const std::optional<Deviation>& deviation);

CaseLabel classify_case(const Instance&                 instance,
                        const ParticipantId&            participant,
                        const std::optional<Deviation>& deviation);

struct DeviationReport
{
  std::uint64_t          instance_id = 0;
  ParticipantId          participant;
  Money                  truthful_utility;
  Money                  best_deviation_utility;
  Money                  best_deviation_bid;
  std::optional<ModelId> best_deviation_model;
  bool                   violated = false;
  CaseLabel              case_label = CaseLabel::NoPilotNoChoice;
  std::uint64_t          deviations_evaluated = 0;
  std::uint64_t          ties                 = 0;
  std::uint64_t          strict_improvements  = 0;
};

/// Fault injection for the verification runner's self-test.
struct PipelineOptions
{
  bool flip_tax_sign = false;
};

/// run_auction with Midpoint C_m and equal split, then any injected fault.
AuctionOutcome pipeline_outcome(const Instance& instance, const BidProfile& bids, const PipelineOptions& opts = {});

/// Utility through the library pipeline for participant i under `bids`.
Money pipeline_utility(const Instance& instance, const ParticipantId& i, const BidProfile& bids,
                       const PipelineOptions& opts = {});

/// The same number computed by the oracle's own dense implementation.
Money oracle_utility(const Instance& instance, const ParticipantId& i, const BidProfile& bids);

/// Dense re-summation of the welfare of `model`.
Money oracle_welfare(const BidProfile& bids, ModelId model);

/// Dense argmax with the same tie rule as the mechanism.
std::optional<ModelId> oracle_select(const BidProfile& bids, std::span<const ModelId> models);

/// Every entry of b_i is varied one at a time over the grid while the rest of
/// the profile stays at truth for i and at `instance.bids` for others.
DeviationReport check_weak_dominance(const Instance& instance, const ParticipantId& participant,
                                     const BidGrid& grid, const PipelineOptions& opts = {});

/// Market used for the participation estimate. Model k is proposed by owner
/// k mod num_owners; every magnitude is drawn around its side's mean.
struct MarketScenario
{
  std::uint32_t num_owners   = 10;
  std::uint32_t num_stations = 10;
  std::uint32_t num_models   = 10;
  Money         owner_mean{100};
  Money         station_mean{50};
  PaymentPolicy policy;
  std::uint64_t seed = 0;
};

struct ExpectedUtility
{
  Money         total{0};
  std::uint64_t samples         = 0;  // participant-rounds
  std::uint64_t selected_rounds = 0;
  std::uint64_t rounds          = 0;

  double mean() const { return samples == 0 ? 0.0 : static_cast<double>(total.gwei()) / static_cast<double>(samples); }
};

/// One truthful single-round market per seed; per-participant utility
/// averaged over all participants of `role` and all seeds.
ExpectedUtility estimate_expected_utility(const MarketScenario& scenario, Role role, std::uint32_t num_seeds);

}  // namespace hcfl
