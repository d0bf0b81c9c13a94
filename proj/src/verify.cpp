#include "hcfl/verify.hpp"

#include "hcfl/codec.hpp"
#include "hcfl/experiments.hpp"

#include <sstream>

namespace hcfl {

namespace {

std::vector<ParticipantId> roster_of(const Instance& inst)
{
  return inst.truth.participants();
}

void check_runs(const std::vector<LedgerRun>& runs, VerifyReport& r)
{
  for (auto const& run : runs)
  {
    for (auto const& s : run.settlements)
    {
      ++r.settled_rounds;
      if (!verify_budget_balance(s))
        ++r.budget_violations;
    }
    ++r.replayed_logs;
    try
    {
      if (replay(run.log).digest() != run.live_digest)
        ++r.replay_mismatches;
    }
    catch (const std::exception&)
    {
      ++r.replay_mismatches;
    }
  }
}

}  // namespace

int VerifyReport::exit_code() const
{
  int code = 0;
  if (dominance_violations)
    code |= 1;
  if (agreement_failures)
    code |= 2;
  if (case_inequality_failures)
    code |= 4;
  if (budget_violations)
    code |= 8;
  if (replay_mismatches)
    code |= 16;
  return code;
}

VerifyReport run_verify(const ScenarioConfig& config, const VerifyOptions& options)
{
  VerifyReport r;
  auto const&  vm = config.verify;
  InstanceLimits const limits{vm.max_models, vm.max_owners, vm.max_stations, vm.max_value};
  PaymentPolicy const  midpoint{EqualAllocation{}, MidpointRule{}};

  if (vm.instances == 0 && vm.budget_seeds == 0)
    r.warnings.push_back("empty verification matrix: nothing was checked");

  for (std::uint32_t n = 0; n < vm.instances; ++n)
  {
    auto const inst = generate_instance(config.seed, n, limits);
    auto       grid = default_grid(inst);
    grid.step       = Money{vm.grid_step};
    ++r.instances;

    json line{{"instance", n}, {"seed", config.seed}};
    bool agree = oracle_select(inst.bids, inst.models) == select_model(inst.bids, inst.models);
    for (auto m : inst.models)
      agree = agree && oracle_welfare(inst.bids, m) == social_welfare(inst.bids, m);
    for (auto const& p : roster_of(inst))
      agree = agree && oracle_utility(inst, p, inst.bids) == pipeline_utility(inst, p, inst.bids, options.pipeline);
    if (!agree)
      ++r.agreement_failures;
    line["agree"] = agree;

    auto const outcome = pipeline_outcome(inst, inst.bids, options.pipeline);
    auto const roster  = roster_of(inst);
    bool       budget  = true;
    try
    {
      budget = verify_budget_balance(settle_round(outcome, midpoint, roster, RecyclePool{}));
    }
    catch (const std::exception&)
    {
      budget = false;
    }
    ++r.settled_rounds;
    if (!budget)
      ++r.budget_violations;
    line["budget_ok"] = budget;

    json violations = json::array();
    json cases      = json::object();
    for (auto const& p : roster)
    {
      auto const rep = check_weak_dominance(inst, p, grid, options.pipeline);
      ++r.participants_checked;
      r.deviations_evaluated += rep.deviations_evaluated;
      r.ties += rep.ties;
      r.strict_improvements += rep.strict_improvements;
      if (rep.violated)
      {
        ++r.dominance_violations;
        violations.push_back({{"participant", p},
                              {"truthful_utility", rep.truthful_utility},
                              {"best_deviation_utility", rep.best_deviation_utility},
                              {"best_deviation_model", *rep.best_deviation_model},
                              {"best_deviation_bid", rep.best_deviation_bid},
                              {"case", to_string(rep.case_label)}});
      }

      std::vector<std::optional<Deviation>> probes{std::nullopt};
      for (auto m : inst.models)
        probes.push_back(Deviation{m, inst.truth.at(p, m)});
      for (auto const& d : probes)
      {
        try
        {
          auto const ev = analyze_case(inst, p, d);
          ++r.case_counts[ev.label];
          cases[std::string(to_string(ev.label))] = cases.value(std::string(to_string(ev.label)), 0) + 1;
          if (!ev.inequality_holds)
            ++r.case_inequality_failures;
        }
        catch (const InvariantError&)
        {
          ++r.case_inequality_failures;
        }
      }
    }
    line["violations"] = violations;
    line["cases"]      = cases;
    if (!violations.empty() || !agree || !budget)
      line["truth"] = inst.truth.reinterpret_as<BidTag>();
    r.lines.push_back(line.dump());
  }

  for (std::uint32_t s = 0; s < vm.budget_seeds; ++s)
  {
    ScenarioConfig c = config;
    c.seed           = config.seed + s;
    c.num_rounds     = options.sweep_rounds;
    check_runs(run_experiment_utility(c).runs, r);
    check_runs(run_experiment_accuracy(c).runs, r);
    check_runs(run_experiment_social(c).runs, r);
  }
  return r;
}

std::string summarize(const VerifyReport& r)
{
  std::ostringstream os;
  auto verdict = [](std::uint64_t bad) { return bad == 0 ? "PASS" : "FAIL"; };
  os << "weak dominance: " << verdict(r.dominance_violations) << " (" << r.dominance_violations
     << " violating participants of " << r.participants_checked << " over " << r.instances << " instances; "
     << r.deviations_evaluated << " deviations, " << r.ties << " ties, " << r.strict_improvements
     << " strict improvements)\n";
  os << "oracle/mechanism agreement: " << verdict(r.agreement_failures) << " (" << r.agreement_failures
     << " disagreeing instances)\n";
  os << "case inequalities: " << verdict(r.case_inequality_failures) << " (";
  bool first = true;
  for (auto const& [c, n] : r.case_counts)
  {
    os << (first ? "" : ", ") << to_string(c) << "=" << n;
    first = false;
  }
  os << ")\n";
  os << "budget balance: " << verdict(r.budget_violations) << " (" << r.budget_violations << " of "
     << r.settled_rounds << " settled rounds)\n";
  os << "ledger replay: " << verdict(r.replay_mismatches) << " (" << r.replay_mismatches << " of "
     << r.replayed_logs << " logs)\n";
  for (auto const& w : r.warnings)
    os << "warning: " << w << "\n";
  return os.str();
}

}  // namespace hcfl
