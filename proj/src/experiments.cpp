#include "hcfl/experiments.hpp"

#include "hcfl/rng.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace hcfl {

namespace {

constexpr std::uint64_t tag(Stream s)
{
  return static_cast<std::uint64_t>(s);
}

std::uint64_t role_tag(const ParticipantId& p)
{
  return p.is_owner() ? 0 : 1;
}

RngStream agent_stream(const ScenarioConfig& c, std::uint64_t round, const ParticipantId& p, Stream s)
{
  return make_stream({c.seed, round, role_tag(p), p.index, tag(s)});
}

std::vector<ParticipantId> make_roster(const ScenarioConfig& c)
{
  std::vector<ParticipantId> out;
  for (std::uint32_t i = 0; i < c.num_owners; ++i)
    out.push_back(owner(i));
  for (std::uint32_t i = 0; i < c.num_stations; ++i)
    out.push_back(station(i));
  return out;
}

Strategy strategy_of(const ScenarioConfig& c, const ParticipantId& p)
{
  auto it = c.strategies.find(p);
  return it == c.strategies.end() ? Strategy{Truthful{}} : it->second;
}

// Bids on every proposal in ascending model order, one lie stream per agent
// and round so that changing one agent's strategy leaves everyone else's
// draws untouched.
MagnitudeTable<BidTag>::Row make_bid_row(const Strategy& s, const MagnitudeTable<ValuationTag>::Row& truth,
                                         RngStream& rng)
{
  MagnitudeTable<BidTag>::Row row;
  for (auto const& [m, v] : truth)
    row[m] = make_bid(s, v, rng);
  return row;
}

ModelProposal make_proposal(const ScenarioConfig& c, ModelId id, ParticipantId who, LabelSet labels)
{
  ModelProposal p;
  p.model_id          = id;
  p.owner             = who;
  p.param_size        = 25'557'032;  // every proposal shares one architecture
  p.characteristics   = 0;
  p.expected_accuracy = c.expected_accuracy;
  p.rounds            = c.model_rounds;
  p.target_labels     = std::move(labels);
  return p;
}

Money true_welfare(const ValuationProfile& truth, ModelId m)
{
  Money w{0};
  for (auto const& [p, row] : truth)
    w += p.is_owner() ? row.at(m) : -row.at(m);
  return w;
}

LedgerConfig ledger_config(const ScenarioConfig& c)
{
  LedgerConfig lc;
  lc.policy               = effective_policy(c);
  lc.forfeit_fraction     = c.forfeit_fraction;
  lc.deposit_floor_factor = c.deposit_floor_factor;
  lc.seed                 = c.seed;
  return lc;
}

LedgerRun finish_run(std::string name, const Ledger& ledger, std::vector<SettlementResult> settlements)
{
  return LedgerRun{std::move(name), ledger.log(), ledger.state().digest(), std::move(settlements)};
}

std::string fmt_double(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

TrainingReport train_target(const ScenarioConfig& c, const RoundMarket& market, const ModelProposal& proposal,
                            std::uint64_t round)
{
  std::vector<ParticipantId> stations;
  for (auto const& p : market.roster)
    if (p.is_station())
      stations.push_back(p);
  auto rng = make_stream({c.seed, round, proposal.model_id.value, tag(Stream::Training)});
  return train(proposal, c.accuracy, equal_data_shares(c.accuracy.total_budget, stations), rng);
}

}  // namespace

PaymentPolicy effective_policy(const ScenarioConfig& config)
{
  PaymentPolicy p = config.policy;
  if (auto* s = std::get_if<SeededUniformRule>(&p.cm_rule))
    s->seed = config.seed;
  return p;
}

RoundRecord run_ledger_round(Ledger& ledger, const RoundMarket& market, const ScenarioConfig& config,
                             std::uint64_t round)
{
  ledger.open_round(market.roster);

  Money mass{0};
  std::map<ParticipantId, Money> own_max;
  for (auto const& [p, row] : market.bids)
  {
    Money mx{0};
    for (auto const& [m, v] : row)
      mx = std::max(mx, v);
    own_max[p] = mx;
    mass += mx;
  }
  for (auto const& p : market.roster)
    ledger.deposit(p, std::max({own_max[p] * config.deposit_floor_factor, mass, Money{1}}));
  ledger.close_deposits();

  for (auto const& prop : market.proposals)
    ledger.submit_proposal(prop.owner, prop);
  ledger.close_proposals();

  for (auto const& p : market.roster)
    ledger.submit_bid(p, market.bids.row(p));

  RoundRecord rec;
  rec.outcome = ledger.run_selection();

  if (rec.outcome.selected)
  {
    auto const& prop = *std::find_if(market.proposals.begin(), market.proposals.end(),
                                     [&](auto const& p) { return p.model_id == *rec.outcome.selected; });
    rec.report = train_target(config, market, prop, round);
    ledger.record_training(prop.owner, *rec.report);
    bool const missed = !realized_vs_expected(*rec.report, prop, config.vote_epsilon);
    for (auto const& voter : ledger.pending_voters())
      ledger.cast_punishment_vote(voter, missed);
  }
  rec.settlement = ledger.settle();
  return rec;
}

// ---------------------------------------------------------------------------

UtilityResult run_experiment_utility(const ScenarioConfig& config)
{
  config.validate();
  auto const rounds  = config.rounds_or(100);
  auto const roster  = make_roster(config);
  auto const tracked = owner(config.tracked_owner);

  struct Arm
  {
    std::string                   name;
    Strategy                      strategy;
    Ledger                        ledger;
    Money                         accumulated{0};
    std::vector<SettlementResult> settlements;
  };
  std::vector<Arm> arms;
  arms.push_back({"truthful", Truthful{}, Ledger(ledger_config(config)), Money{0}, {}});
  arms.push_back({"dishonest", config.dishonest, Ledger(ledger_config(config)), Money{0}, {}});

  UtilityResult out;
  for (std::uint32_t r = 1; r <= rounds; ++r)
  {
    RoundMarket market;
    market.roster = roster;
    for (std::uint32_t k = 0; k < config.num_models_per_round; ++k)
    {
      auto const who = owner((k + r) % config.num_owners);
      market.proposals.push_back(make_proposal(config, ModelId{k}, who, {(k + r) % config.label_universe_size}));
    }
    for (auto const& p : roster)
    {
      AgentConfig agent{p, strategy_of(config, p), p.is_owner() ? config.owner_mean : config.station_mean, {}};
      auto        rng = agent_stream(config, r, p, Stream::Valuation);
      market.truth.set_row(p, draw_valuations(agent, market.proposals, rng, config.accuracy.reference_rounds));
    }

    for (auto& arm : arms)
    {
      RoundMarket m = market;
      for (auto const& p : roster)
      {
        auto rng = agent_stream(config, r, p, Stream::Lie);
        auto s   = p == tracked ? arm.strategy : strategy_of(config, p);
        m.bids.set_row(p, make_bid_row(s, market.truth.row(p), rng));
      }
      auto rec = run_ledger_round(arm.ledger, m, config, r);
      arm.settlements.push_back(rec.settlement);
      auto const u = utility(tracked, rec.outcome, market.truth);
      arm.accumulated += u;
      out.rows.push_back({r, arm.name, u, arm.accumulated});
    }
  }
  out.truthful_total  = arms[0].accumulated;
  out.dishonest_total = arms[1].accumulated;
  for (auto& arm : arms)
    out.runs.push_back(finish_run("utility_" + arm.name, arm.ledger, std::move(arm.settlements)));
  return out;
}

// ---------------------------------------------------------------------------

LabelMarket generate_label_market(const ScenarioConfig& config, std::uint64_t round)
{
  auto const U = config.label_universe_size;

  LabelMarket lm;
  auto        rng = make_stream({config.seed, round, tag(Stream::Interests)});
  std::vector<Label> labels(U);
  std::iota(labels.begin(), labels.end(), Label{0});
  std::shuffle(labels.begin(), labels.end(), rng);
  auto const size = static_cast<std::size_t>(
      uniform_int(rng, config.intersection.min_size, config.intersection.max_size));
  lm.intersection.insert(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(size));

  std::bernoulli_distribution expand(config.intersection.expansion_prob);
  for (std::uint32_t i = 0; i < config.num_owners; ++i)
  {
    auto     orng = agent_stream(config, round, owner(i), Stream::Interests);
    LabelSet y    = lm.intersection;
    for (Label l = 0; l < U; ++l)
      if (!lm.intersection.contains(l) && expand(orng))
        y.insert(l);
    lm.interests.push_back(std::move(y));
  }

  LabelSet everything;
  for (Label l = 0; l < U; ++l)
    everything.insert(l);

  auto& m  = lm.market;
  m.roster = make_roster(config);
  for (std::uint32_t k = 0; k < config.num_models_per_round; ++k)
  {
    auto const o = static_cast<std::uint32_t>((k + round) % config.num_owners);
    m.proposals.push_back(make_proposal(config, ModelId{k}, owner(o), lm.interests[o]));
  }
  for (auto const& p : m.roster)
  {
    auto        rng2  = agent_stream(config, round, p, Stream::Valuation);
    bool const  is_o  = p.is_owner();
    AgentConfig agent{p, strategy_of(config, p), Money{0},
                      draw_label_values(is_o ? config.per_label_owner_mean : config.per_label_station_mean,
                                        is_o ? lm.interests[p.index] : everything, U, rng2)};
    m.truth.set_row(p, draw_valuations(agent, m.proposals, rng2, config.accuracy.reference_rounds));
    lm.agents.push_back(std::move(agent));

    auto lie = agent_stream(config, round, p, Stream::Lie);
    m.bids.set_row(p, make_bid_row(strategy_of(config, p), m.truth.row(p), lie));
  }
  return lm;
}

Money target_welfare(const LabelMarket& lm, const LabelSet& target, const ScenarioConfig& config)
{
  auto const probe = make_proposal(config, ModelId{0}, owner(0), target);
  RngStream  unused{0};
  Money      w{0};
  for (auto const& a : lm.agents)
  {
    auto const v = draw_valuations(a, {probe}, unused, config.accuracy.reference_rounds).at(probe.model_id);
    w += a.id.is_owner() ? v : -v;
  }
  return w;
}

AccuracyResult run_experiment_accuracy(const ScenarioConfig& config)
{
  config.validate();
  auto const rounds = config.rounds_or(10);
  Ledger     ledger(ledger_config(config));

  AccuracyResult                out;
  std::vector<SettlementResult> settlements;
  double                        vcg_sum = 0.0, rnd_sum = 0.0;
  std::size_t                   n       = 0;
  for (std::uint32_t r = 1; r <= rounds; ++r)
  {
    auto const lm  = generate_label_market(config, r);
    auto       rec = run_ledger_round(ledger, lm.market, config, r);
    settlements.push_back(rec.settlement);

    auto       trng   = make_stream({config.seed, r, tag(Stream::Target)});
    auto const target = select_baseline_target(RandomTarget{}, lm.interests, config.label_universe_size, trng);
    auto const random_report =
        train_target(config, lm.market, make_proposal(config, ModelId{0}, owner(0), target), r);

    for (auto l : lm.intersection)
    {
      double const v = rec.report ? rec.report->accuracy_on({l}) : 0.0;
      double const b = random_report.accuracy_on({l});
      out.rows.push_back({r, "vcg", l, v});
      out.rows.push_back({r, "random", l, b});
      vcg_sum += v;
      rnd_sum += b;
      ++n;
    }
  }
  out.vcg_mean    = n ? vcg_sum / static_cast<double>(n) : 0.0;
  out.random_mean = n ? rnd_sum / static_cast<double>(n) : 0.0;
  out.runs.push_back(finish_run("accuracy_vcg", ledger, std::move(settlements)));
  return out;
}

SocialResult run_experiment_social(const ScenarioConfig& config)
{
  config.validate();
  auto const rounds  = config.rounds_or(10);
  bool const has_vcg = std::find(config.social_strategies.begin(), config.social_strategies.end(),
                                 SocialStrategy::Vcg) != config.social_strategies.end();
  Ledger     ledger(ledger_config(config));

  SocialResult                     out;
  std::vector<SettlementResult>    settlements;
  std::map<SocialStrategy, double> acc;
  for (std::uint32_t r = 1; r <= rounds; ++r)
  {
    auto const lm = generate_label_market(config, r);
    for (auto s : config.social_strategies)
    {
      double social = 0.0;
      switch (s)
      {
      case SocialStrategy::Vcg: {
        auto rec = run_ledger_round(ledger, lm.market, config, r);
        settlements.push_back(rec.settlement);
        if (rec.outcome.selected)
          social = social_utility_metric(true_welfare(lm.market.truth, *rec.outcome.selected), rec.report);
        break;
      }
      case SocialStrategy::Selfish:
      case SocialStrategy::Random: {
        auto       trng = make_stream({config.seed, r, tag(Stream::Target)});
        auto const target =
            s == SocialStrategy::Selfish
                ? select_baseline_target(SelfishIntersection{}, lm.interests, config.label_universe_size, trng)
                : select_baseline_target(RandomTarget{}, lm.interests, config.label_universe_size, trng);
        auto const report =
            train_target(config, lm.market, make_proposal(config, ModelId{0}, owner(0), target), r);
        social = social_utility_metric(target_welfare(lm, target, config), report);
        break;
      }
      }
      acc[s] += social;
      out.rows.push_back({r, std::string(to_string(s)), social, acc[s]});
    }
  }
  out.final_accumulated = acc;
  if (has_vcg)
    out.runs.push_back(finish_run("social_vcg", ledger, std::move(settlements)));
  return out;
}

// ---------------------------------------------------------------------------

std::string to_csv(const std::vector<UtilityRow>& rows)
{
  std::string s = "round,strategy,utility,accumulated_utility\n";
  for (auto const& r : rows)
    s += std::to_string(r.round) + "," + r.strategy + "," + r.utility.to_string() + "," +
         r.accumulated.to_string() + "\n";
  return s;
}

std::string to_csv(const std::vector<AccuracyRow>& rows)
{
  std::string s = "round,strategy,label,accuracy\n";
  for (auto const& r : rows)
    s += std::to_string(r.round) + "," + r.strategy + "," + std::to_string(r.label) + "," +
         fmt_double(r.accuracy) + "\n";
  return s;
}

std::string to_csv(const std::vector<SocialRow>& rows)
{
  std::string s = "round,strategy,social_utility,accumulated_social_utility\n";
  for (auto const& r : rows)
    s += std::to_string(r.round) + "," + r.strategy + "," + fmt_double(r.social_utility) + "," +
         fmt_double(r.accumulated) + "\n";
  return s;
}

void write_outputs(const std::filesystem::path& dir, const std::string& stem, const std::string& csv,
                   const std::vector<LedgerRun>& runs)
{
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / (stem + ".csv"), std::ios::binary);
    f << csv;
    if (!f)
      throw std::runtime_error("cannot write " + (dir / (stem + ".csv")).string());
  }
  for (auto const& run : runs)
  {
    std::ofstream f(dir / (run.name + ".log"), std::ios::binary);
    write_event_log(f, run.log);
    if (!f)
      throw std::runtime_error("cannot write " + (dir / (run.name + ".log")).string());
  }
}

}  // namespace hcfl
