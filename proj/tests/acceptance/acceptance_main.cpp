// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Experiment seeds are processed one at a time so the
// event logs of a single seed are the only ones held in memory.

#include "hcfl/experiments.hpp"
#include "hcfl/ledger.hpp"
#include "hcfl/oracle.hpp"
#include "hcfl/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace hcfl;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int                        failures = 0;
std::map<int, std::string> verdicts;  // printed in criterion order at the end

void report(int n, bool ok, const std::string& what, const std::string& detail)
{
  if (!ok)
    ++failures;
  verdicts[n] = std::string(ok ? "PASS" : "FAIL") + " criterion " + std::to_string(n) + ": " + what + " | " + detail;
  std::cerr << "[criterion " << n << " evaluated]" << std::endl;
}

constexpr std::uint64_t kInstanceSeed   = 20240601;
constexpr std::uint32_t kNumInstances   = 1000;
constexpr std::uint32_t kExperimentSeeds = 100;

// --- budget balance, recomputed here rather than trusting the library check --

struct BudgetTally
{
  std::uint64_t rounds     = 0;
  std::uint64_t violations = 0;
  std::uint64_t conservation_checks = 0;
  std::uint64_t conservation_failures = 0;
};

Money sum_values(const std::map<ParticipantId, Money>& m)
{
  Money s{0};
  for (auto const& [_, v] : m)
    s += v;
  return s;
}

void check_settlement(const SettlementResult& s, BudgetTally& t)
{
  ++t.rounds;
  Money const revenue = sum_values(s.owner_shares) + sum_values(s.taxes);
  bool ok = revenue >= s.total_payment;
  ok      = ok && sum_values(s.owner_shares) == s.total_payment;
  ok      = ok && sum_values(s.station_rewards) == s.total_payment;
  ok      = ok && sum_values(s.balance_deltas) + s.recycle_pool_delta == Money{0};
  if (!ok)
    ++t.violations;
}

// --- ledger replay ------------------------------------------------------------

struct ReplayTally
{
  std::uint64_t logs       = 0;
  std::uint64_t mismatches = 0;
};

void check_runs(const std::vector<LedgerRun>& runs, BudgetTally& budget, ReplayTally& replays)
{
  for (auto const& run : runs)
  {
    for (auto const& s : run.settlements)
      check_settlement(s, budget);

    ++replays.logs;
    // Through the text encoding, exactly as a log file on disk would be read.
    std::stringstream io;
    write_event_log(io, run.log);
    try
    {
      auto const state = replay(read_event_log(io));
      if (state.digest() != run.live_digest)
        ++replays.mismatches;
      ++budget.conservation_checks;
      if (sum_values(state.cumulative_delta) + state.recycle_pool.total() != Money{0})
        ++budget.conservation_failures;
    }
    catch (const std::exception&)
    {
      ++replays.mismatches;
    }
  }
}

// --- criteria 1 and 2 ------------------------------------------------------------

void instance_matrix(BudgetTally& budget)
{
  auto const t0 = Clock::now();
  std::uint64_t participants = 0, violators = 0, deviations = 0, ties = 0, strict = 0;
  std::map<CaseLabel, std::uint64_t> coverage;
  std::uint64_t classified = 0, inequality_failures = 0, invariant_errors = 0;
  std::string   first_violation;

  PaymentPolicy const midpoint{EqualAllocation{}, MidpointRule{}};
  for (std::uint32_t n = 0; n < kNumInstances; ++n)
  {
    auto const inst = generate_instance(kInstanceSeed, n);
    auto const grid = default_grid(inst);
    auto const roster = inst.truth.participants();

    check_settlement(settle_round(pipeline_outcome(inst, inst.bids), midpoint, roster, RecyclePool{}), budget);

    for (auto const& p : roster)
    {
      auto const rep = check_weak_dominance(inst, p, grid);
      ++participants;
      deviations += rep.deviations_evaluated;
      ties += rep.ties;
      strict += rep.strict_improvements;
      if (rep.best_deviation_utility > rep.truthful_utility)
      {
        ++violators;
        if (first_violation.empty())
        {
          std::ostringstream os;
          os << "first: instance " << n << " " << p << " truthful " << rep.truthful_utility << " < "
             << rep.best_deviation_utility << " bidding " << rep.best_deviation_bid << " on model "
             << *rep.best_deviation_model << " (" << to_string(rep.case_label) << ")";
          first_violation = os.str();
        }
      }

      std::vector<std::optional<Deviation>> probes{std::nullopt};
      for (auto m : inst.models)
        for (auto const b : {Money{0}, inst.truth.at(p, m), grid.hi})
          probes.push_back(Deviation{m, b});
      for (auto const& d : probes)
      {
        try
        {
          auto const ev = analyze_case(inst, p, d);
          ++classified;
          ++coverage[ev.label];
          if (!ev.inequality_holds)
            ++inequality_failures;
        }
        catch (const InvariantError&)
        {
          ++invariant_errors;
        }
      }
    }
  }
  double const elapsed = seconds_since(t0);

  std::ostringstream d1;
  d1 << violators << " violating participants of " << participants << " over " << kNumInstances
     << " instances (grid step 1 on [0, 2*max]); " << deviations << " deviations, " << ties << " ties, " << strict
     << " strict improvements; " << elapsed << " s";
  if (!first_violation.empty())
    d1 << "; " << first_violation;
  report(1, violators == 0 && elapsed < 120.0, "weak dominance of truthful bidding", d1.str());

  bool all_cases = true;
  std::ostringstream d2;
  for (auto c : {CaseLabel::Case1, CaseLabel::Case2, CaseLabel::Case3, CaseLabel::Case4, CaseLabel::Case5})
  {
    all_cases = all_cases && coverage[c] > 0;
    d2 << to_string(c) << "=" << coverage[c] << " ";
  }
  d2 << "NoPilotNoChoice=" << coverage[CaseLabel::NoPilotNoChoice] << "; " << inequality_failures
     << " inequality failures, " << invariant_errors << " unreachable configurations over " << classified
     << " classifications";
  report(2, all_cases && inequality_failures == 0 && invariant_errors == 0, "case coverage and case inequalities",
         d2.str());
}

// --- criterion 7: out-of-phase fuzz and tamper detection -----------------------

ModelProposal proposal_for(ModelId id, ParticipantId owner)
{
  ModelProposal p;
  p.model_id          = id;
  p.owner             = owner;
  p.param_size        = 25'557'032;
  p.characteristics   = 4;
  p.expected_accuracy = Rational{1, 2};
  p.rounds            = 50;
  p.target_labels     = {0, 1};
  return p;
}

struct FuzzTally
{
  std::uint64_t attempts = 0;
  std::uint64_t rejected = 0;
};

// Walks rounds on a small market. Before each legal step, every operation
// that belongs to another phase is attempted and must raise PhaseError without
// touching the log.
void phase_fuzz(std::uint64_t seed, FuzzTally& tally)
{
  std::mt19937_64 rng(seed);
  std::vector<ParticipantId> roster{owner(0), owner(1), owner(2), station(0), station(1)};
  LedgerConfig cfg;
  cfg.seed = seed;
  Ledger ledger(cfg);
  MagnitudeTable<BidTag>::Row const row{{ModelId{0}, Money{0}}, {ModelId{1}, Money{0}}};

  TrainingReport report;
  report.model = ModelId{0};
  report.station_contribution = {{station(0), Rational{1, 2}}, {station(1), Rational{1, 2}}};

  using Op = std::function<void()>;
  struct NamedOp
  {
    Phase legal;
    Op    op;
  };
  std::vector<NamedOp> ops{
      {Phase::Deposit, [&] { ledger.deposit(owner(0), Money{1}); }},
      {Phase::Deposit, [&] { ledger.close_deposits(); }},
      {Phase::Proposal, [&] { ledger.submit_proposal(owner(0), proposal_for(ModelId{9}, owner(0))); }},
      {Phase::Proposal, [&] { ledger.close_proposals(); }},
      {Phase::Bidding, [&] { ledger.submit_bid(owner(0), row); }},
      {Phase::Bidding, [&] { ledger.run_selection(); }},
      {Phase::Training, [&] { ledger.record_training(owner(0), report); }},
      {Phase::Evaluation, [&] { ledger.cast_punishment_vote(owner(1), false); }},
      {Phase::Settlement, [&] { ledger.settle(); }},
  };

  auto probe = [&] {
    auto const phase = ledger.state().phase;
    std::vector<std::size_t> order(ops.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (auto k : order)
    {
      if (ops[k].legal == phase)
        continue;
      ++tally.attempts;
      auto const before = ledger.log().size();
      try
      {
        ops[k].op();
      }
      catch (const PhaseError&)
      {
        if (ledger.log().size() == before)
          ++tally.rejected;
      }
      catch (const std::exception&)
      {}
    }
    if (phase != Phase::Setup && phase != Phase::Closed)
    {
      ++tally.attempts;
      auto const before = ledger.log().size();
      try
      {
        ledger.open_round(roster);
      }
      catch (const PhaseError&)
      {
        if (ledger.log().size() == before)
          ++tally.rejected;
      }
    }
  };

  for (int round = 0; round < 3; ++round)
  {
    probe();
    ledger.open_round(roster);
    probe();
    for (auto const& p : roster)
      ledger.deposit(p, Money{1000});
    ledger.close_deposits();
    probe();
    ledger.submit_proposal(owner(0), proposal_for(ModelId{0}, owner(0)));
    ledger.submit_proposal(owner(1), proposal_for(ModelId{1}, owner(1)));
    ledger.close_proposals();
    probe();
    std::uniform_int_distribution<std::int64_t> bid(0, 100);
    for (auto const& p : roster)
      ledger.submit_bid(p, {{ModelId{0}, Money{bid(rng)}}, {ModelId{1}, Money{bid(rng)}}});
    auto const outcome = ledger.run_selection();
    if (outcome.selected)
    {
      probe();
      report.model = *outcome.selected;
      ledger.record_training(*ledger.state().winner, report);
      probe();
      for (auto const& v : ledger.pending_voters())
        ledger.cast_punishment_vote(v, std::bernoulli_distribution(0.5)(rng));
    }
    probe();
    ledger.settle();
  }
  probe();
}

struct TamperTally
{
  std::uint64_t trials   = 0;
  std::uint64_t detected = 0;  // at exactly the first altered sequence
  std::string   first_miss;
};

void tamper_trials(const std::vector<Event>& log, std::uint64_t seed, TamperTally& t)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, log.size() - 2);

  auto expect = [&](std::vector<Event> bad, std::uint64_t at, const char* kind) {
    ++t.trials;
    try
    {
      verify_chain(bad);
    }
    catch (const ChainError& e)
    {
      if (e.sequence == at)
      {
        ++t.detected;
        return;
      }
    }
    if (t.first_miss.empty())
      t.first_miss = std::string(kind) + " at " + std::to_string(at);
  };

  for (int trial = 0; trial < 25; ++trial)
  {
    auto const k = pick(rng);
    {
      auto bad = log;
      auto& pl = bad[k].payload;
      std::uniform_int_distribution<std::size_t> pos(0, pl.size() - 1);
      auto const i = pos(rng);
      pl[i]        = pl[i] == '0' ? '1' : '0';
      expect(std::move(bad), k, "payload edit");
    }
    {
      auto bad = log;
      bad[k].round += 1;
      expect(std::move(bad), k, "round edit");
    }
    {
      auto bad = log;
      bad[k].kind = bad[k].kind == EventKind::VoteCast ? EventKind::Punished : EventKind::VoteCast;
      expect(std::move(bad), k, "kind edit");
    }
    {
      auto bad = log;
      bad[k].hash[std::uniform_int_distribution<std::size_t>(0, 31)(rng)] ^= 0x01;
      expect(std::move(bad), k, "hash byte edit");
    }
    {
      auto bad = log;
      bad.erase(bad.begin() + static_cast<std::ptrdiff_t>(k));
      expect(std::move(bad), k, "deletion");
    }
    {
      auto bad = log;
      std::swap(bad[k], bad[k + 1]);
      expect(std::move(bad), k, "swap");
    }
  }
}

}  // namespace

int main()
{
  std::cout << "acceptance run: " << kNumInstances << " instances (seed " << kInstanceSeed << "), "
            << kExperimentSeeds << " experiment seeds" << std::endl;

  BudgetTally budget;
  ReplayTally replays;

  instance_matrix(budget);

  // Criterion 4: paired truthful and dishonest runs on the default scenario.
  {
    auto const    t0      = Clock::now();
    std::uint32_t wins    = 0;
    Money         margin_min{std::numeric_limits<std::int64_t>::max()};
    for (std::uint32_t s = 0; s < kExperimentSeeds; ++s)
    {
      ScenarioConfig c;
      c.seed       = s;
      auto const r = run_experiment_utility(c);
      if (r.truthful_total >= r.dishonest_total)
        ++wins;
      margin_min = std::min(margin_min, r.truthful_total - r.dishonest_total);
      check_runs(r.runs, budget, replays);
    }
    double const elapsed = seconds_since(t0);
    std::ostringstream d;
    d << wins << "/" << kExperimentSeeds << " seeds with accumulated truthful >= dishonest at round 100"
      << "; smallest margin " << margin_min << " Gwei; " << elapsed << " s (including replay checks)";
    report(4, wins >= 95 && elapsed < 60.0, "truthful beats dishonest accumulated utility", d.str());
  }

  // Criterion 5: accumulated social utility.
  {
    std::uint32_t beats_selfish = 0, beats_random = 0, beats_both = 0;
    for (std::uint32_t s = 0; s < kExperimentSeeds; ++s)
    {
      ScenarioConfig c;
      c.seed        = s;
      auto const r  = run_experiment_social(c);
      auto const v  = r.final_accumulated.at(SocialStrategy::Vcg);
      bool const bs = v >= r.final_accumulated.at(SocialStrategy::Selfish);
      bool const br = v >= r.final_accumulated.at(SocialStrategy::Random);
      beats_selfish += bs;
      beats_random += br;
      beats_both += bs && br;
      check_runs(r.runs, budget, replays);
    }
    std::ostringstream d;
    d << "VCG >= Selfish in " << beats_selfish << "/" << kExperimentSeeds << ", VCG >= Random in " << beats_random
      << "/" << kExperimentSeeds << ", both in " << beats_both << "/" << kExperimentSeeds << " (need 95 each)";
    report(5, beats_selfish >= 95 && beats_random >= 95, "VCG accumulated social utility leads", d.str());
  }

  // Criterion 6: intersection accuracy.
  {
    std::uint32_t wins = 0;
    double        vsum = 0, rsum = 0;
    for (std::uint32_t s = 0; s < kExperimentSeeds; ++s)
    {
      ScenarioConfig c;
      c.seed       = s;
      auto const r = run_experiment_accuracy(c);
      wins += r.vcg_mean >= r.random_mean;
      vsum += r.vcg_mean;
      rsum += r.random_mean;
      check_runs(r.runs, budget, replays);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "%u/%u seeds with VCG >= random; mean accuracy %.4f vs %.4f", wins,
                  kExperimentSeeds, vsum / kExperimentSeeds, rsum / kExperimentSeeds);
    report(6, wins >= 90, "intersection accuracy of VCG targets", buf);
  }

  // Criterion 3 collects every settlement seen above.
  {
    std::ostringstream d;
    d << budget.violations << " violations over " << budget.rounds << " settled rounds; "
      << budget.conservation_failures << " conservation failures over " << budget.conservation_checks
      << " replayed final states";
    report(3, budget.violations == 0 && budget.conservation_failures == 0 && budget.rounds > 0,
           "budget balance and conservation", d.str());
  }

  // Criterion 7.
  {
    FuzzTally fuzz;
    for (std::uint64_t s = 0; s < 50; ++s)
      phase_fuzz(s, fuzz);

    TamperTally tamper;
    for (std::uint64_t s = 0; s < 4; ++s)
    {
      ScenarioConfig c;
      c.seed       = s;
      c.num_rounds = 5;
      auto const r = run_experiment_utility(c);
      tamper_trials(r.runs.front().log, s, tamper);
    }
    std::ostringstream d;
    d << replays.mismatches << " digest mismatches over " << replays.logs << " replayed logs; " << fuzz.rejected
      << "/" << fuzz.attempts << " out-of-phase operations rejected with the log unchanged; " << tamper.detected
      << "/" << tamper.trials << " tampered logs flagged at the first altered event";
    if (!tamper.first_miss.empty())
      d << " (first miss: " << tamper.first_miss << ")";
    bool const ok = replays.mismatches == 0 && replays.logs > 0 && fuzz.rejected == fuzz.attempts &&
                    fuzz.attempts > 0 && tamper.detected == tamper.trials;
    report(7, ok, "ledger replay, phase discipline and tamper evidence", d.str());
  }

  // Criterion 8.
  {
    MarketScenario const scenario;
    auto const owners   = estimate_expected_utility(scenario, Role::ModelOwner, 100);
    auto const stations = estimate_expected_utility(scenario, Role::BaseStation, 100);
    char buf[200];
    std::snprintf(buf, sizeof buf, "owner mean %.3f, station mean %.3f Gwei per participant-round over %llu seeds",
                  owners.mean(), stations.mean(), static_cast<unsigned long long>(owners.rounds));
    report(8, owners.total >= Money{0} && stations.total >= Money{0} && owners.rounds >= 100,
           "participation constraint", buf);
  }

  for (auto const& [_, line] : verdicts)
    std::cout << line << "\n";
  std::cout << (failures == 0 ? "ALL CRITERIA PASS" : std::to_string(failures) + " CRITERIA FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
