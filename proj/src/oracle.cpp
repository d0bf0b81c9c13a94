#include "hcfl/oracle.hpp"

#include "hcfl/agents.hpp"
#include "hcfl/rng.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>

namespace hcfl {

// ---------------------------------------------------------------------------
// Dense re-implementation. Deliberately shares no code with mechanism.cpp or
// settlement.cpp: participants are rows of a plain matrix, models are column
// indices, and every rule is re-derived from scratch.

namespace {

struct Dense
{
  std::vector<ParticipantId>             ids;    // ascending
  std::vector<std::vector<std::int64_t>> b;      // b[p][k]
  std::vector<ModelId>                   models; // ascending
  static constexpr std::size_t           npos = static_cast<std::size_t>(-1);

  std::size_t index_of(const ParticipantId& p) const
  {
    auto it = std::lower_bound(ids.begin(), ids.end(), p);
    if (it == ids.end() || *it != p)
      throw UnknownParticipantError(p);
    return static_cast<std::size_t>(it - ids.begin());
  }

  bool owner(std::size_t p) const { return ids[p].role == Role::ModelOwner; }

  std::int64_t welfare(std::size_t k, std::size_t skip = npos) const
  {
    std::int64_t w = 0;
    for (std::size_t p = 0; p < ids.size(); ++p)
      if (p != skip)
        w += owner(p) ? b[p][k] : -b[p][k];
    return w;
  }

  std::size_t select(std::size_t skip = npos) const
  {
    std::size_t  best   = npos;
    std::int64_t best_w = 0;
    for (std::size_t k = 0; k < models.size(); ++k)
    {
      auto const w = welfare(k, skip);
      if (w > best_w)
      {
        best   = k;
        best_w = w;
      }
    }
    return best;
  }

  std::int64_t side_sum(std::size_t k, bool owners) const
  {
    std::int64_t s = 0;
    for (std::size_t p = 0; p < ids.size(); ++p)
      if (owner(p) == owners)
        s += b[p][k];
    return s;
  }

  // Midpoint of the bid interval, bounds swapped if the interval is empty.
  std::int64_t total(std::size_t k) const
  {
    auto lo = side_sum(k, false);
    auto hi = side_sum(k, true);
    if (lo > hi)
      std::swap(lo, hi);
    return lo + (hi - lo) / 2;
  }

  // Equal split; the remainder goes one unit each to the lowest ids.
  std::int64_t share(std::size_t k, std::size_t p) const
  {
    std::int64_t n = 0, rank = 0;
    for (std::size_t q = 0; q < ids.size(); ++q)
    {
      if (owner(q) != owner(p))
        continue;
      if (q < p)
        ++rank;
      ++n;
    }
    auto const c = total(k);
    return c / n + (rank < c % n ? 1 : 0);
  }

  std::int64_t others_surplus(std::size_t k, std::size_t i) const
  {
    if (k == npos)
      return 0;
    std::int64_t s = 0;
    for (std::size_t p = 0; p < ids.size(); ++p)
    {
      if (p == i || owner(p) != owner(i))
        continue;
      s += owner(p) ? b[p][k] - share(k, p) : share(k, p) - b[p][k];
    }
    return s;
  }

  // Own side's surplus under k, the participant included.
  std::int64_t side_surplus(std::size_t k, std::size_t i) const
  {
    if (k == npos)
      return 0;
    auto const c = total(k);
    return owner(i) ? side_sum(k, true) - c : c - side_sum(k, false);
  }
};

Dense densify(const BidProfile& bids, std::span<const ModelId> models)
{
  Dense d;
  d.models.assign(models.begin(), models.end());
  std::sort(d.models.begin(), d.models.end());
  for (auto const& [p, row] : bids)
  {
    d.ids.push_back(p);
    std::vector<std::int64_t> r;
    for (auto m : d.models)
    {
      auto it = row.find(m);
      if (it == row.end())
        throw MissingEntryError(p, m);
      r.push_back(it->second.gwei());
    }
    d.b.push_back(std::move(r));
  }
  return d;
}

std::optional<ModelId> to_model(const Dense& d, std::size_t k)
{
  return k == Dense::npos ? std::nullopt : std::optional<ModelId>(d.models[k]);
}

std::size_t column_of(const Dense& d, ModelId m)
{
  auto it = std::find(d.models.begin(), d.models.end(), m);
  if (it == d.models.end())
    throw std::invalid_argument("model " + std::to_string(m.value) + " is not in the instance");
  return static_cast<std::size_t>(it - d.models.begin());
}

const PaymentFn& midpoint_payments()
{
  static const PaymentFn fn = make_payment_fn(PaymentPolicy{EqualAllocation{}, MidpointRule{}}, 0);
  return fn;
}

}  // namespace

// ---------------------------------------------------------------------------

BidProfile Instance::truthful_for(const ParticipantId& i) const
{
  BidProfile out = bids;
  out.set_row(i, truth.row(i));
  return out;
}

Instance generate_instance(std::uint64_t seed, std::uint64_t id, const InstanceLimits& limits)
{
  if (limits.max_models == 0 || limits.max_owners == 0 || limits.max_stations == 0 || limits.max_value < 0)
    throw std::invalid_argument("instance limits must be positive");
  auto rng = make_stream({seed, id, static_cast<std::uint64_t>(Stream::Instance)});

  Instance inst;
  inst.id               = id;
  auto const n_models   = uniform_int(rng, 1, limits.max_models);
  auto const n_owners   = uniform_int(rng, 1, limits.max_owners);
  auto const n_stations = uniform_int(rng, 1, limits.max_stations);
  for (std::int64_t k = 0; k < n_models; ++k)
    inst.models.push_back(ModelId{static_cast<std::uint32_t>(k)});

  auto fill = [&](ParticipantId p) {
    for (auto m : inst.models)
      inst.truth.set(p, m, Money{uniform_int(rng, 0, limits.max_value)});
  };
  for (std::int64_t i = 0; i < n_owners; ++i)
    fill(owner(static_cast<std::uint32_t>(i)));
  for (std::int64_t i = 0; i < n_stations; ++i)
    fill(station(static_cast<std::uint32_t>(i)));
  inst.bids = truthful_bids(inst.truth);
  return inst;
}

std::vector<Money> BidGrid::values() const
{
  if (step <= Money{0})
    throw std::invalid_argument("grid step must be positive");
  std::vector<Money> out;
  for (Money v = lo; v <= hi; v += step)
    out.push_back(v);
  return out;
}

BidGrid default_grid(const Instance& instance)
{
  Money top{0};
  for (auto const& [p, row] : instance.truth)
    for (auto const& [m, v] : row)
      top = std::max(top, v);
  return BidGrid{Money{0}, top * 2, Money{1}};
}

std::string_view to_string(CaseLabel c)
{
  static constexpr std::array<std::string_view, 6> names{
      "Case1", "Case2", "Case3", "Case4", "Case5", "NoPilotNoChoice"};
  return names.at(static_cast<std::size_t>(c));
}

Money oracle_welfare(const BidProfile& bids, ModelId model)
{
  std::array<ModelId, 1> one{model};
  return Money{densify(bids, one).welfare(0)};
}

std::optional<ModelId> oracle_select(const BidProfile& bids, std::span<const ModelId> models)
{
  auto const d = densify(bids, models);
  return to_model(d, d.select());
}

AuctionOutcome pipeline_outcome(const Instance& instance, const BidProfile& bids, const PipelineOptions& opts)
{
  auto outcome = run_auction(bids, instance.models, midpoint_payments());
  if (opts.flip_tax_sign)
    for (auto& [p, t] : outcome.taxes)
      t = -t;
  return outcome;
}

Money pipeline_utility(const Instance& instance, const ParticipantId& i, const BidProfile& bids,
                       const PipelineOptions& opts)
{
  return utility(i, pipeline_outcome(instance, bids, opts), instance.truth);
}

Money oracle_utility(const Instance& instance, const ParticipantId& i, const BidProfile& bids)
{
  auto const d  = densify(bids, instance.models);
  auto const p  = d.index_of(i);
  auto const s  = d.select();
  auto const cf = d.select(p);

  std::int64_t tax = 0;
  if (cf != s)
    tax = std::llabs(d.others_surplus(s, p) - d.others_surplus(cf, p));

  std::int64_t net = 0;
  if (s != Dense::npos)
  {
    auto const v = instance.truth.at(i, d.models[s]).gwei();
    net          = d.owner(p) ? v - d.share(s, p) : d.share(s, p) - v;
  }
  return Money{net - tax};
}

CaseEvidence analyze_case(const Instance&                 instance,
                          const ParticipantId&            participant,
                          const std::optional<Deviation>& deviation)
{
  auto const truthful = instance.truthful_for(participant);
  auto const d        = densify(truthful, instance.models);
  auto const i        = d.index_of(participant);
  auto const s        = d.select();
  auto const cf       = d.select(i);

  CaseEvidence ev;
  ev.pilot    = cf != s;
  ev.selected = to_model(d, s);

  std::int64_t max_w = d.models.empty() ? 0 : d.welfare(0);
  for (std::size_t k = 1; k < d.models.size(); ++k)
    max_w = std::max(max_w, d.welfare(k));
  ev.max_welfare = Money{max_w};

  if (s == Dense::npos)
  {
    if (max_w < 0)
    {
      ev.label            = CaseLabel::Case5;
      ev.inequality_holds = true;
      for (std::size_t k = 0; k < d.models.size(); ++k)
        ev.inequality_holds = ev.inequality_holds && d.welfare(k) < 0;
    }
    else
    {
      ev.label            = CaseLabel::NoPilotNoChoice;
      ev.inequality_holds = max_w == 0;
    }
    return ev;
  }
  if (d.welfare(s) <= 0)
    throw InvariantError("selected model has non-positive welfare");

  auto own_net = [&](std::size_t k) -> std::int64_t {
    if (k == Dense::npos)
      return 0;
    auto const v = instance.truth.at(participant, d.models[k]).gwei();
    return d.owner(i) ? v - d.share(k, i) : d.share(k, i) - v;
  };
  auto fill = [&](std::size_t m, std::size_t mp) {
    ev.m         = to_model(d, m);
    ev.m_prime   = to_model(d, mp);
    auto const h = d.side_surplus(m, i), hp = d.side_surplus(mp, i);
    ev.h_m       = Money{h};
    ev.h_m_prime = Money{hp};
    ev.g_m       = Money{h - own_net(m)};
    ev.g_m_prime = Money{hp - own_net(mp)};
  };

  auto const pushed = deviation ? column_of(d, deviation->model) : s;
  if (pushed == s)
  {
    // Alternative: the counterfactual winner for a pilot, else the best
    // other model with positive welfare.
    std::size_t alt = cf;
    if (!ev.pilot)
    {
      alt = Dense::npos;
      std::int64_t best_w = 0;
      for (std::size_t k = 0; k < d.models.size(); ++k)
        if (k != s && d.welfare(k) > best_w)
        {
          alt    = k;
          best_w = d.welfare(k);
        }
    }
    if (ev.pilot && alt == s)
      throw InvariantError("pilot whose exclusion leaves the selection unchanged");
    fill(s, alt);
    ev.label            = ev.pilot ? CaseLabel::Case2 : CaseLabel::Case1;
    ev.inequality_holds = ev.h_m >= ev.h_m_prime;
  }
  else
  {
    fill(pushed, s);
    ev.label            = ev.pilot ? CaseLabel::Case3 : CaseLabel::Case4;
    ev.inequality_holds = ev.h_m <= ev.h_m_prime;
  }
  return ev;
}

CaseLabel classify_case(const Instance&                 instance,
                        const ParticipantId&            participant,
                        const std::optional<Deviation>& deviation)
{
  return analyze_case(instance, participant, deviation).label;
}

DeviationReport check_weak_dominance(const Instance& instance, const ParticipantId& participant,
                                     const BidGrid& grid, const PipelineOptions& opts)
{
  auto const truthful = instance.truthful_for(participant);
  auto const values   = grid.values();

  DeviationReport r;
  r.instance_id            = instance.id;
  r.participant            = participant;
  r.truthful_utility       = pipeline_utility(instance, participant, truthful, opts);
  r.best_deviation_utility = r.truthful_utility;

  std::optional<Deviation> best;
  for (auto m : instance.models)
  {
    auto const truth_bid = instance.truth.at(participant, m);
    for (auto v : values)
    {
      if (v == truth_bid)
        continue;
      auto deviated = truthful;
      deviated.set(participant, m, v);
      auto const u = pipeline_utility(instance, participant, deviated, opts);
      ++r.deviations_evaluated;
      if (u == r.truthful_utility)
        ++r.ties;
      else if (u > r.truthful_utility)
        ++r.strict_improvements;
      if (!best || u > r.best_deviation_utility)
      {
        best                     = Deviation{m, v};
        r.best_deviation_utility = u;
      }
    }
  }
  if (best)
  {
    r.best_deviation_bid   = best->bid;
    r.best_deviation_model = best->model;
  }
  r.violated   = r.best_deviation_utility > r.truthful_utility;
  r.case_label = classify_case(instance, participant, best);
  return r;
}

ExpectedUtility estimate_expected_utility(const MarketScenario& scenario, Role role, std::uint32_t num_seeds)
{
  if (scenario.num_owners == 0 || scenario.num_stations == 0 || scenario.num_models == 0)
    throw std::invalid_argument("market scenario needs owners, stations and models");

  std::vector<ModelProposal> proposals;
  for (std::uint32_t k = 0; k < scenario.num_models; ++k)
  {
    ModelProposal p;
    p.model_id          = ModelId{k};
    p.owner             = owner(k % scenario.num_owners);
    p.expected_accuracy = Rational(9, 10);
    p.rounds            = 50;
    p.target_labels     = {k % 10};
    proposals.push_back(std::move(p));
  }
  auto const models = model_ids(proposals);

  std::vector<AgentConfig> agents;
  for (std::uint32_t i = 0; i < scenario.num_owners; ++i)
    agents.push_back({owner(i), Truthful{}, scenario.owner_mean, {}});
  for (std::uint32_t i = 0; i < scenario.num_stations; ++i)
    agents.push_back({station(i), Truthful{}, scenario.station_mean, {}});

  ExpectedUtility out;
  for (std::uint32_t s = 0; s < num_seeds; ++s)
  {
    ValuationProfile truth;
    for (auto const& a : agents)
    {
      auto rng = make_stream({scenario.seed, s, a.id.is_owner() ? 0u : 1u, a.id.index,
                              static_cast<std::uint64_t>(Stream::Valuation)});
      truth.set_row(a.id, draw_valuations(a, proposals, rng));
    }
    auto const outcome =
        run_auction(truthful_bids(truth), models, make_payment_fn(scenario.policy, s));
    ++out.rounds;
    if (outcome.selected)
      ++out.selected_rounds;
    for (auto const& a : agents)
    {
      if (a.id.role != role)
        continue;
      out.total += utility(a.id, outcome, truth);
      ++out.samples;
    }
  }
  return out;
}

}  // namespace hcfl
