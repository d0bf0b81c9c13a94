#include "hcfl/settlement.hpp"

#include "hcfl/rng.hpp"

#include <algorithm>
#include <numeric>

namespace hcfl {

namespace {

// Apportionment products can exceed int64 before the division.
__extension__ using Wide = __int128;

struct SideSums
{
  Money owners;
  Money stations;
};

SideSums side_sums(const BidProfile& bids, ModelId m)
{
  SideSums s;
  for (auto const& [p, row] : bids)
  {
    auto it = row.find(m);
    if (it == row.end())
      throw MissingEntryError(p, m);
    (p.is_owner() ? s.owners : s.stations) += it->second;
  }
  return s;
}

Money draw_in_interval(Money lo, Money hi, const CmRule& rule, std::uint64_t round_id, ModelId m)
{
  if (std::holds_alternative<MidpointRule>(rule))
    return (lo + hi).floor_div(2);
  auto const& uni = std::get<SeededUniformRule>(rule);
  auto rng = make_stream({uni.seed, round_id, m.value, static_cast<std::uint64_t>(Stream::Payment)});
  return Money{uniform_int(rng, lo.gwei(), hi.gwei())};
}

std::vector<ParticipantId> members_of(const BidProfile& bids, Role side)
{
  std::vector<ParticipantId> out;
  for (auto const& [p, _] : bids)
    if (p.role == side)
      out.push_back(p);
  return out;
}

Money sum_values(const std::map<ParticipantId, Money>& m)
{
  Money s{0};
  for (auto const& [_, v] : m)
    s += v;
  return s;
}

std::map<ParticipantId, Money> split_pro_rata(Money pool, const std::map<ParticipantId, Money>& basis)
{
  std::map<ParticipantId, Money> out;
  if (basis.empty())
  {
    if (pool != Money{0})
      throw SettlementError("recycle pool has no recipients");
    return out;
  }
  std::vector<std::pair<ParticipantId, std::int64_t>> weights;
  bool any_positive = false;
  for (auto const& [p, v] : basis)
  {
    weights.emplace_back(p, v.gwei());
    any_positive = any_positive || v > Money{0};
  }
  if (!any_positive)
    for (auto& [_, w] : weights)
      w = 1;
  return apportion(pool, weights);
}

}  // namespace

Money choose_total_payment(const BidProfile&    bids,
                           ModelId              selected,
                           const PaymentPolicy& policy,
                           std::uint64_t        round_id)
{
  auto const s = side_sums(bids, selected);
  if (s.owners < s.stations)
    throw SettlementError("empty payment interval for model " + std::to_string(selected.value) +
                          ": owners bid " + s.owners.to_string() + " < station cost " +
                          s.stations.to_string());
  return draw_in_interval(s.stations, s.owners, policy.cm_rule, round_id, selected);
}

std::map<ParticipantId, Money> apportion(Money total,
                                         const std::vector<std::pair<ParticipantId, std::int64_t>>& weights)
{
  if (total < Money{0})
    throw std::invalid_argument("apportion: negative total");
  Wide weight_sum = 0;
  for (auto const& [p, w] : weights)
  {
    if (w < 0)
      throw std::invalid_argument("apportion: negative weight for " + p.to_string());
    weight_sum += w;
  }
  if (weight_sum <= 0)
    throw std::invalid_argument("apportion: weights sum to zero");

  struct Slot
  {
    ParticipantId p;
    std::int64_t  quota;
    Wide      remainder;
  };
  std::vector<Slot> slots;
  slots.reserve(weights.size());
  std::int64_t assigned = 0;
  for (auto const& [p, w] : weights)
  {
    Wide scaled = static_cast<Wide>(total.gwei()) * w;
    auto     q      = static_cast<std::int64_t>(scaled / weight_sum);
    slots.push_back({p, q, scaled % weight_sum});
    assigned += q;
  }

  std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    if (a.remainder != b.remainder)
      return a.remainder > b.remainder;
    return a.p < b.p;
  });
  std::int64_t leftover = total.gwei() - assigned;
  for (auto& s : slots)
  {
    if (leftover == 0)
      break;
    ++s.quota;
    --leftover;
  }

  std::map<ParticipantId, Money> out;
  for (auto const& s : slots)
    out[s.p] = Money{s.quota};
  return out;
}

std::map<ParticipantId, Money> allocate_shares(Money                          total,
                                               Role                           side,
                                               const PaymentPolicy&           policy,
                                               std::span<const ParticipantId> members,
                                               const ContributionWeights*     contributions)
{
  if (members.empty())
    throw std::invalid_argument("allocate_shares: no members on side " +
                                std::string(to_string(side)));

  std::vector<std::pair<ParticipantId, std::int64_t>> weights;
  weights.reserve(members.size());

  if (auto const* cap = std::get_if<CapabilityAllocation>(&policy.allocation))
  {
    for (auto const& p : members)
    {
      auto it = cap->weights.find(p);
      if (it == cap->weights.end())
        throw std::invalid_argument("missing capability weight for " + p.to_string());
      if (it->second <= 0)
        throw std::invalid_argument("capability weight must be positive for " + p.to_string());
      weights.emplace_back(p, it->second);
    }
  }
  else if (std::holds_alternative<ContributionAllocation>(policy.allocation) &&
           side == Role::BaseStation && contributions != nullptr)
  {
    // Bring the rational weights onto a common denominator.
    std::int64_t denom = 1;
    for (auto const& p : members)
    {
      auto it = contributions->find(p);
      if (it == contributions->end())
        throw std::invalid_argument("missing contribution weight for " + p.to_string());
      if (it->second < 0)
        throw std::invalid_argument("negative contribution weight for " + p.to_string());
      denom = std::lcm(denom, it->second.denominator());
    }
    for (auto const& p : members)
    {
      auto const& w = contributions->at(p);
      weights.emplace_back(p, w.numerator() * (denom / w.denominator()));
    }
  }
  else
  {
    for (auto const& p : members)
      weights.emplace_back(p, 1);
  }

  if (total == Money{0})
  {
    std::map<ParticipantId, Money> zeros;
    for (auto const& p : members)
      zeros[p] = Money{0};
    return zeros;
  }
  return apportion(total, weights);
}

PaymentFn make_payment_fn(const PaymentPolicy&       policy,
                          std::uint64_t              round_id,
                          const ContributionWeights* contributions)
{
  std::optional<ContributionWeights> owned;
  if (contributions != nullptr)
    owned = *contributions;
  return [policy, round_id, owned](const BidProfile& bids, ModelId m) {
    auto const s  = side_sums(bids, m);
    auto const lo = std::min(s.owners, s.stations);
    auto const hi = std::max(s.owners, s.stations);

    PaymentPlan plan;
    plan.total = draw_in_interval(lo, hi, policy.cm_rule, round_id, m);
    for (Role side : {Role::ModelOwner, Role::BaseStation})
    {
      auto const members = members_of(bids, side);
      if (members.empty())
        continue;
      plan.shares.merge(
          allocate_shares(plan.total, side, policy, members, owned ? &*owned : nullptr));
    }
    return plan;
  };
}

RecycleAdjustments recycle_tax(const RecyclePool&                     pool,
                               const std::map<ParticipantId, Money>& owner_shares,
                               const std::map<ParticipantId, Money>& station_rewards)
{
  if (pool.from_owners < Money{0} || pool.from_stations < Money{0})
    throw std::invalid_argument("recycle_tax: negative pool");
  return {split_pro_rata(pool.from_owners, owner_shares),
          split_pro_rata(pool.from_stations, station_rewards)};
}

SettlementResult settle_round(const AuctionOutcome&          outcome,
                              const PaymentPolicy&           policy,
                              std::span<const ParticipantId> participants,
                              const RecyclePool&             pool,
                              const ContributionWeights*     contributions)
{
  SettlementResult r;
  r.total_payment = outcome.selected ? outcome.total_payment : Money{0};

  std::vector<ParticipantId> stations;
  for (auto const& p : participants)
  {
    if (p.is_owner())
      r.owner_shares[p] = outcome.selected ? outcome.payment(p) : Money{0};
    else
    {
      r.station_rewards[p] = outcome.selected ? outcome.payment(p) : Money{0};
      stations.push_back(p);
    }
    r.taxes[p] = outcome.tax(p);
  }

  if (outcome.selected && contributions != nullptr &&
      std::holds_alternative<ContributionAllocation>(policy.allocation) && !stations.empty())
  {
    r.station_rewards =
        allocate_shares(r.total_payment, Role::BaseStation, policy, stations, contributions);
  }

  auto adj          = recycle_tax(pool, r.owner_shares, r.station_rewards);
  r.owner_rebates   = std::move(adj.owner_rebates);
  r.station_bonuses = std::move(adj.station_bonuses);

  for (auto const& [p, share] : r.owner_shares)
  {
    Money rebate       = r.owner_rebates.contains(p) ? r.owner_rebates.at(p) : Money{0};
    r.balance_deltas[p] = rebate - share - r.taxes.at(p);
    r.next_pool.from_owners += r.taxes.at(p);
  }
  for (auto const& [p, reward] : r.station_rewards)
  {
    Money bonus         = r.station_bonuses.contains(p) ? r.station_bonuses.at(p) : Money{0};
    r.balance_deltas[p] = reward + bonus - r.taxes.at(p);
    r.next_pool.from_stations += r.taxes.at(p);
  }

  r.recycle_pool_delta = r.next_pool.total() - pool.total();
  r.revenue            = sum_values(r.owner_shares) + sum_values(r.taxes);
  return r;
}

bool verify_budget_balance(const SettlementResult& r)
{
  Money const owners_paid = sum_values(r.owner_shares);
  if (owners_paid != r.total_payment)
    return false;
  if (sum_values(r.station_rewards) != r.total_payment)
    return false;
  if (r.revenue != owners_paid + sum_values(r.taxes))
    return false;
  if (r.revenue < r.total_payment)
    return false;
  if (sum_values(r.forfeits) != Money{0})
    return false;
  return sum_values(r.balance_deltas) + r.recycle_pool_delta == Money{0};
}

}  // namespace hcfl
