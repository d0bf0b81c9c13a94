#pragma once

#include "hcfl/mechanism.hpp"
#include "hcfl/oracle.hpp"
#include "hcfl/settlement.hpp"

#include <vector>

namespace hcfl::testing {

inline const ModelId kA{0};
inline const ModelId kB{1};

inline const ParticipantId O1 = owner(1);
inline const ParticipantId O2 = owner(2);
inline const ParticipantId S1 = station(1);
inline const ParticipantId S2 = station(2);

inline std::vector<ModelId> ex1_models()
{
  return {kA, kB};
}

/// Two owners, two stations, two models. Welfare A = 80, B = 60.
inline BidProfile ex1_bids()
{
  BidProfile b;
  b.set_row(O1, {{kA, Money{100}}, {kB, Money{30}}});
  b.set_row(O2, {{kA, Money{60}}, {kB, Money{120}}});
  b.set_row(S1, {{kA, Money{40}}, {kB, Money{40}}});
  b.set_row(S2, {{kA, Money{40}}, {kB, Money{50}}});
  return b;
}

inline ValuationProfile ex1_truth()
{
  return ex1_bids().reinterpret_as<ValuationTag>();
}

inline Instance ex1_instance()
{
  return Instance{0, ex1_models(), ex1_truth(), ex1_bids()};
}

inline PaymentFn midpoint_equal()
{
  return make_payment_fn(PaymentPolicy{EqualAllocation{}, MidpointRule{}}, 0);
}

inline AuctionOutcome ex1_outcome()
{
  auto const models = ex1_models();
  return run_auction(ex1_bids(), models, midpoint_equal());
}

}  // namespace hcfl::testing
