#include "hcfl/mechanism.hpp"

#include <algorithm>

namespace hcfl {

namespace {

Money signed_bid(const ParticipantId& p, Money magnitude)
{
  return p.is_owner() ? magnitude : -magnitude;
}

// Welfare with ties resolved toward the smallest model id.
std::optional<ModelId> argmax_positive(const std::map<ModelId, Money>& welfare)
{
  std::optional<ModelId> best;
  Money                  best_w{0};
  for (auto const& [m, w] : welfare)  // ascending model id
  {
    if (w > best_w)
    {
      best   = m;
      best_w = w;
    }
  }
  return best;
}

std::map<ModelId, Money> welfare_table(const BidProfile& bids, std::span<const ModelId> models)
{
  std::map<ModelId, Money> out;
  for (auto m : models)
    out[m] = social_welfare(bids, m);
  return out;
}

std::map<ModelId, Money> welfare_without(const std::map<ModelId, Money>& welfare,
                                         const BidProfile&               bids,
                                         const ParticipantId&            excluded)
{
  auto out = welfare;
  for (auto& [m, w] : out)
    w -= signed_bid(excluded, bids.at(excluded, m));
  return out;
}

// S(k): surplus of i's own group excluding i; owners count b - c, stations c - b.
Money group_surplus(const ParticipantId&           i,
                    const BidProfile&              bids,
                    const std::optional<ModelId>&  model,
                    const PaymentPlan*             plan)
{
  if (!model)
    return Money{0};
  Money s{0};
  for (auto const& [j, row] : bids)
  {
    if (j == i || j.role != i.role)
      continue;
    Money b = row.at(*model);
    Money c = plan->share(j);
    s += j.is_owner() ? b - c : c - b;
  }
  return s;
}

class PlanCache
{
public:
  PlanCache(const BidProfile& bids, const PaymentFn& fn)
    : bids_(bids)
    , fn_(fn)
  {}

  const PaymentPlan* get(const std::optional<ModelId>& m)
  {
    if (!m)
      return nullptr;
    auto it = plans_.find(*m);
    if (it == plans_.end())
      it = plans_.emplace(*m, fn_(bids_, *m)).first;
    return &it->second;
  }

private:
  const BidProfile&                bids_;
  const PaymentFn&                 fn_;
  std::map<ModelId, PaymentPlan>   plans_;
};

Money tax_for(const ParticipantId&          i,
              const BidProfile&             bids,
              const std::optional<ModelId>& selected,
              const std::optional<ModelId>& counterfactual,
              PlanCache&                    plans)
{
  if (selected == counterfactual)
    return Money{0};
  if (!selected && !counterfactual)
    throw InvariantError("pilot " + i.to_string() + " with no selection on either side");

  Money without_i = group_surplus(i, bids, counterfactual, plans.get(counterfactual));
  if (!selected)
    return without_i.abs();
  Money with_i = group_surplus(i, bids, selected, plans.get(selected));
  return (with_i - without_i).abs();
}

}  // namespace

Money PaymentPlan::share(const ParticipantId& p) const
{
  auto it = shares.find(p);
  return it == shares.end() ? Money{0} : it->second;
}

Money AuctionOutcome::tax(const ParticipantId& p) const
{
  auto it = taxes.find(p);
  return it == taxes.end() ? Money{0} : it->second;
}

Money AuctionOutcome::payment(const ParticipantId& p) const
{
  auto it = payments.find(p);
  return it == payments.end() ? Money{0} : it->second;
}

Money social_welfare(const BidProfile& bids, ModelId model)
{
  Money w{0};
  for (auto const& [p, row] : bids)
  {
    auto it = row.find(model);
    if (it == row.end())
      throw MissingEntryError(p, model);
    w += signed_bid(p, it->second);
  }
  return w;
}

std::optional<ModelId> select_model(const BidProfile& bids, std::span<const ModelId> models)
{
  if (models.empty())
    throw std::invalid_argument("select_model: no models proposed");
  bids.require_complete({models.begin(), models.end()});
  return argmax_positive(welfare_table(bids, models));
}

std::optional<ModelId> select_model(const BidProfile& bids, const std::vector<ModelProposal>& models)
{
  auto ids = model_ids(models);
  return select_model(bids, ids);
}

std::optional<ModelId> counterfactual_selection(const BidProfile&        bids,
                                                std::span<const ModelId> models,
                                                const ParticipantId&     excluded)
{
  if (!bids.contains(excluded))
    throw UnknownParticipantError(excluded);
  bids.require_complete({models.begin(), models.end()});
  return argmax_positive(welfare_without(welfare_table(bids, models), bids, excluded));
}

std::set<ParticipantId> pilots(const BidProfile& bids, std::span<const ModelId> models)
{
  bids.require_complete({models.begin(), models.end()});
  auto const welfare  = welfare_table(bids, models);
  auto const selected = argmax_positive(welfare);
  std::set<ParticipantId> out;
  for (auto const& [p, _] : bids)
    if (argmax_positive(welfare_without(welfare, bids, p)) != selected)
      out.insert(p);
  return out;
}

Money clarke_tax(const ParticipantId&     i,
                 const BidProfile&        bids,
                 std::span<const ModelId> models,
                 const PaymentFn&         payments)
{
  if (!bids.contains(i))
    throw UnknownParticipantError(i);
  bids.require_complete({models.begin(), models.end()});
  auto const welfare = welfare_table(bids, models);
  PlanCache  plans(bids, payments);
  return tax_for(i,
                 bids,
                 argmax_positive(welfare),
                 argmax_positive(welfare_without(welfare, bids, i)),
                 plans);
}

AuctionOutcome run_auction(const BidProfile&        bids,
                           std::span<const ModelId> models,
                           const PaymentFn&         payments)
{
  if (models.empty())
    throw std::invalid_argument("run_auction: no models proposed");
  bids.require_complete({models.begin(), models.end()});

  AuctionOutcome out;
  out.welfare  = welfare_table(bids, models);
  out.selected = argmax_positive(out.welfare);

  PlanCache plans(bids, payments);
  for (auto const& [p, _] : bids)
  {
    auto cf                        = argmax_positive(welfare_without(out.welfare, bids, p));
    out.counterfactual_selected[p] = cf;
    if (cf != out.selected)
      out.pilots.insert(p);
    out.taxes[p] = tax_for(p, bids, out.selected, cf, plans);
  }

  if (auto const* plan = plans.get(out.selected))
  {
    out.total_payment = plan->total;
    for (auto const& [p, _] : bids)
      out.payments[p] = plan->share(p);
  }
  else
  {
    for (auto const& [p, _] : bids)
      out.payments[p] = Money{0};
  }
  return out;
}

Money utility(const ParticipantId& i, const AuctionOutcome& outcome, const ValuationProfile& truth)
{
  Money const tax = outcome.tax(i);
  if (!outcome.selected)
    return -tax;
  Money const v = truth.at(i, *outcome.selected);
  Money const c = outcome.payment(i);
  return (i.is_owner() ? v - c : c - v) - tax;
}

}  // namespace hcfl
