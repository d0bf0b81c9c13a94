#pragma once

#include "hcfl/mechanism.hpp"
#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace hcfl {

/// Split C_m equally within each side.
struct EqualAllocation
{
  friend bool operator==(const EqualAllocation&, const EqualAllocation&) = default;
};

/// Split by fixed positive integer capability weights (both sides).
struct CapabilityAllocation
{
  std::map<ParticipantId, std::int64_t> weights;
  friend bool operator==(const CapabilityAllocation&, const CapabilityAllocation&) = default;
};

/// Owners split equally; station rewards follow training contribution once a
/// training report exists, equally before that.
struct ContributionAllocation
{
  friend bool operator==(const ContributionAllocation&, const ContributionAllocation&) = default;
};

using Allocation = std::variant<EqualAllocation, CapabilityAllocation, ContributionAllocation>;

/// floor((lo + hi) / 2) of the bid interval.
struct MidpointRule
{
  friend bool operator==(const MidpointRule&, const MidpointRule&) = default;
};

/// Uniform draw on the bid interval; the stream is derived from
/// (seed, round, model) so counterfactual evaluations repeat the same draw.
struct SeededUniformRule
{
  std::uint64_t seed = 0;
  friend bool operator==(const SeededUniformRule&, const SeededUniformRule&) = default;
};

using CmRule = std::variant<MidpointRule, SeededUniformRule>;

struct PaymentPolicy
{
  Allocation allocation = EqualAllocation{};
  CmRule     cm_rule    = MidpointRule{};

  friend bool operator==(const PaymentPolicy&, const PaymentPolicy&) = default;
};

/// Station contribution weights, summing to one.
using ContributionWeights = std::map<ParticipantId, Rational>;

class SettlementError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// C_m for a selected model: Σ_O b ≥ C_m ≥ Σ_B b. Throws SettlementError when
/// the interval is empty.
Money choose_total_payment(const BidProfile&    bids,
                           ModelId              selected,
                           const PaymentPolicy& policy,
                           std::uint64_t        round_id = 0);

/// Integer shares of `total` for one side. Equal splits floor and hands the
/// remainder out one unit at a time in ascending id order; weighted variants
/// use largest-remainder apportionment with the same tie-break. Shares sum to
/// `total` exactly.
std::map<ParticipantId, Money> allocate_shares(Money                          total,
                                               Role                           side,
                                               const PaymentPolicy&           policy,
                                               std::span<const ParticipantId> members,
                                               const ContributionWeights*     contributions = nullptr);

/// Largest-remainder apportionment of a nonnegative total over nonnegative
/// integer weights with a positive sum.
std::map<ParticipantId, Money> apportion(Money total,
                                         const std::vector<std::pair<ParticipantId, std::int64_t>>& weights);

/// PaymentFn realizing `policy` for one round. For models whose bid interval is
/// empty (counterfactual winners only) the rule is applied to the swapped
/// bounds.
PaymentFn make_payment_fn(const PaymentPolicy&       policy,
                          std::uint64_t              round_id,
                          const ContributionWeights* contributions = nullptr);

/// Tax carried from the previous round, kept per paying side.
struct RecyclePool
{
  Money from_owners;
  Money from_stations;

  Money total() const { return from_owners + from_stations; }
  friend bool operator==(const RecyclePool&, const RecyclePool&) = default;
};

struct RecycleAdjustments
{
  std::map<ParticipantId, Money> owner_rebates;
  std::map<ParticipantId, Money> station_bonuses;
};

/// Drains the pool in full: owner-paid tax comes back as rebates pro rata to
/// this round's owner shares, station-paid tax as bonuses pro rata to station
/// rewards. With all-zero shares on a side (no model selected) the side's pool
/// is split equally.
RecycleAdjustments recycle_tax(const RecyclePool&                     pool,
                               const std::map<ParticipantId, Money>& owner_shares,
                               const std::map<ParticipantId, Money>& station_rewards);

struct SettlementResult
{
  Money                          total_payment;  // C_m
  std::map<ParticipantId, Money> owner_shares;
  std::map<ParticipantId, Money> station_rewards;
  std::map<ParticipantId, Money> taxes;
  std::map<ParticipantId, Money> owner_rebates;
  std::map<ParticipantId, Money> station_bonuses;
  std::map<ParticipantId, Money> forfeits;  // signed transfers among owners
  std::map<ParticipantId, Money> shortfalls;  // unpaid debits absorbed by the pool
  std::map<ParticipantId, Money> balance_deltas;
  Money                          recycle_pool_delta;
  Money                          revenue;  // R
  RecyclePool                    next_pool;

  friend bool operator==(const SettlementResult&, const SettlementResult&) = default;
};

/// Settles one round: shares, taxes, recycle adjustments and resulting
/// balance deltas. `contributions` re-weights station rewards under
/// ContributionAllocation.
SettlementResult settle_round(const AuctionOutcome&          outcome,
                              const PaymentPolicy&           policy,
                              std::span<const ParticipantId> participants,
                              const RecyclePool&             pool,
                              const ContributionWeights*     contributions = nullptr);

/// Revenue accounting and conservation check on a settled round.
bool verify_budget_balance(const SettlementResult& result);

}  // namespace hcfl
