#pragma once

// Scenario files: JSON objects tagged "schema": "hcfl-scenario/1". Every key
// is optional except the schema tag; unknown keys are rejected so typos fail
// loudly. Defaults reproduce the desk-scale experiment setup documented in
// the README.

#include "hcfl/agents.hpp"
#include "hcfl/codec.hpp"
#include "hcfl/flsim.hpp"
#include "hcfl/money.hpp"
#include "hcfl/settlement.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcfl {

inline constexpr std::string_view kScenarioSchema = "hcfl-scenario/1";

class ScenarioError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class SocialStrategy : std::uint8_t
{
  Vcg,
  Selfish,
  Random,
};

std::string_view to_string(SocialStrategy s);

struct IntersectionGenerator
{
  std::uint32_t min_size       = 1;
  std::uint32_t max_size       = 3;
  double        expansion_prob = 0.5;  // per non-intersection label, per owner

  friend bool operator==(const IntersectionGenerator&, const IntersectionGenerator&) = default;
};

struct VerifyMatrix
{
  std::uint32_t instances          = 1000;
  std::uint32_t max_models         = 3;
  std::uint32_t max_owners         = 4;
  std::uint32_t max_stations       = 4;
  std::int64_t  max_value          = 20;
  std::int64_t  grid_step          = 1;
  std::uint32_t budget_seeds       = 10;
  std::uint32_t participation_seeds = 100;

  friend bool operator==(const VerifyMatrix&, const VerifyMatrix&) = default;
};

struct ScenarioConfig
{
  std::uint64_t                        seed                 = 0;
  std::uint32_t                        num_owners           = 10;
  std::uint32_t                        num_stations         = 10;
  std::uint32_t                        num_models_per_round = 10;
  std::optional<std::uint32_t>         num_rounds;  // experiment default when absent
  std::uint32_t                        label_universe_size  = 10;
  Money                                owner_mean{100};
  Money                                station_mean{50};
  Money                                per_label_owner_mean{10};
  Money                                per_label_station_mean{5};
  std::uint32_t                        model_rounds         = 50;
  Rational                             expected_accuracy{4, 5};
  std::uint32_t                        tracked_owner        = 0;
  Dishonest                            dishonest;
  std::map<ParticipantId, Strategy>    strategies;  // absent agents are truthful
  std::vector<SocialStrategy>          social_strategies{SocialStrategy::Vcg, SocialStrategy::Selfish,
                                                         SocialStrategy::Random};
  IntersectionGenerator                intersection;
  PaymentPolicy                        policy;
  AccuracyModel                        accuracy;
  Rational                             forfeit_fraction{1, 2};
  std::int64_t                         deposit_floor_factor = 2;
  double                               vote_epsilon         = 0.1;
  VerifyMatrix                         verify;

  /// Throws ScenarioError naming the offending field.
  void validate() const;

  std::uint32_t rounds_or(std::uint32_t fallback) const { return num_rounds.value_or(fallback); }

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

ScenarioConfig parse_scenario(const json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);
json           scenario_to_json(const ScenarioConfig& c);

}  // namespace hcfl
