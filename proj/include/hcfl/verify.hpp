#pragma once

// Verification runner behind `hcfl verify`: the deviation matrix, case
// coverage, oracle/mechanism agreement, a budget-balance sweep over settled
// rounds and ledger replay determinism.

#include "hcfl/oracle.hpp"
#include "hcfl/scenario.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hcfl {

struct VerifyOptions
{
  PipelineOptions pipeline;
  std::uint32_t   sweep_rounds = 20;  // rounds per experiment in the budget/replay sweep
};

struct VerifyReport
{
  std::uint64_t instances            = 0;
  std::uint64_t participants_checked = 0;
  std::uint64_t deviations_evaluated = 0;
  std::uint64_t ties                 = 0;
  std::uint64_t strict_improvements  = 0;
  std::uint64_t dominance_violations = 0;  // participants with a profitable deviation
  std::uint64_t agreement_failures   = 0;
  std::uint64_t case_inequality_failures = 0;
  std::uint64_t settled_rounds       = 0;
  std::uint64_t budget_violations    = 0;
  std::uint64_t replayed_logs        = 0;
  std::uint64_t replay_mismatches    = 0;
  std::map<CaseLabel, std::uint64_t> case_counts;
  std::vector<std::string>           lines;     // one JSON object per instance
  std::vector<std::string>           warnings;

  /// Bit 0 dominance, bit 1 agreement, bit 2 case inequalities, bit 3 budget,
  /// bit 4 replay. Zero means every check passed.
  int exit_code() const;
};

VerifyReport run_verify(const ScenarioConfig& config, const VerifyOptions& options = {});

/// Human-readable summary, one check per line.
std::string summarize(const VerifyReport& report);

}  // namespace hcfl
