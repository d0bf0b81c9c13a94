#pragma once

// Model selection, pilot detection and the Clarke tax.
//
// Sign conventions: owners' bids and values count positively toward welfare
// and their payments are outflows; stations' claimed costs count negatively
// and their payments are inflows. Tables store magnitudes only.

#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

namespace hcfl {

/// A state the mechanism should never reach; indicates a bug, not bad input.
class InvariantError : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Total payment C_m for one model plus every participant's share magnitude
/// (owners pay it, stations receive it).
struct PaymentPlan
{
  Money                           total;
  std::map<ParticipantId, Money> shares;

  Money share(const ParticipantId& p) const;
};

/// Deterministic payment rule evaluated on the full bid profile for any
/// candidate model, including counterfactual winners whose bid interval is
/// empty.
using PaymentFn = std::function<PaymentPlan(const BidProfile&, ModelId)>;

struct AuctionOutcome
{
  std::optional<ModelId>                                 selected;
  std::map<ModelId, Money>                               welfare;
  std::map<ParticipantId, std::optional<ModelId>>        counterfactual_selected;
  std::set<ParticipantId>                                pilots;
  std::map<ParticipantId, Money>                         taxes;
  std::map<ParticipantId, Money>                         payments;
  Money                                                  total_payment;

  Money tax(const ParticipantId& p) const;
  Money payment(const ParticipantId& p) const;

  friend bool operator==(const AuctionOutcome&, const AuctionOutcome&) = default;
};

/// Σ_O b − Σ_B b for one model. Throws MissingEntryError naming the
/// participant lacking a bid.
Money social_welfare(const BidProfile& bids, ModelId model);

/// Welfare argmax among models with strictly positive welfare. Ties go to the
/// smallest model id. Empty when no model has positive welfare.
std::optional<ModelId> select_model(const BidProfile& bids, std::span<const ModelId> models);
std::optional<ModelId> select_model(const BidProfile& bids,
                                    const std::vector<ModelProposal>& models);

/// select_model with `excluded`'s bids removed from every welfare sum.
std::optional<ModelId> counterfactual_selection(const BidProfile&       bids,
                                                std::span<const ModelId> models,
                                                const ParticipantId&     excluded);

/// Participants whose exclusion changes the selection (including
/// present ↔ absent).
std::set<ParticipantId> pilots(const BidProfile& bids, std::span<const ModelId> models);

/// Clarke tax for `i`, summed over i's own role group I only:
///  - non-pilot: 0;
///  - pilot, model m selected: |S(m) − S(m′)|;
///  - pilot, nothing selected: |S(m′)|;
/// where S(k) = Σ_{j∈I∖i} (signed b_j^k + signed c_j^k), S(absent) = 0 and m′
/// is the counterfactual selection without i.
Money clarke_tax(const ParticipantId&     i,
                 const BidProfile&        bids,
                 std::span<const ModelId> models,
                 const PaymentFn&         payments);

/// Selection, pilots, taxes and payment shares in one pass.
AuctionOutcome run_auction(const BidProfile&        bids,
                           std::span<const ModelId> models,
                           const PaymentFn&         payments);

/// Quasi-linear utility: owner v − c − tax, station c − v − tax, or −tax when
/// nothing is selected.
Money utility(const ParticipantId& i, const AuctionOutcome& outcome, const ValuationProfile& truth);

}  // namespace hcfl
