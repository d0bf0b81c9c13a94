#pragma once

#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"
#include "hcfl/rng.hpp"

#include <map>
#include <span>
#include <variant>
#include <vector>

namespace hcfl {

struct Truthful
{
  friend bool operator==(const Truthful&, const Truthful&) = default;
};

/// With probability `prob` each claim is truth·(1 + u), u ~ U[−halfwidth,
/// +halfwidth], rounded and clamped at zero.
struct Dishonest
{
  double prob      = 0.5;
  double halfwidth = 0.5;
  friend bool operator==(const Dishonest&, const Dishonest&) = default;
};

/// Baseline target rule: the exact intersection of all owners' interests.
struct SelfishIntersection
{
  friend bool operator==(const SelfishIntersection&, const SelfishIntersection&) = default;
};

/// Baseline target rule: a uniformly random nonempty label subset.
struct RandomTarget
{
  friend bool operator==(const RandomTarget&, const RandomTarget&) = default;
};

using Strategy = std::variant<Truthful, Dishonest, SelfishIntersection, RandomTarget>;

/// Throws std::invalid_argument on out-of-range parameters.
void validate(const Strategy& s);

struct AgentConfig
{
  ParticipantId            id;
  Strategy                 strategy = Truthful{};
  Money                    mean_value{0};
  std::map<Label, Money>   label_values;  // every label of the universe; 0 = no interest
};

/// Uniform integer on [mean/2, 3·mean/2].
Money draw_around_mean(Money mean, RngStream& rng);

/// Per-label values: labels in `interests` get draw_around_mean(mean), others 0.
std::map<Label, Money> draw_label_values(Money mean, const LabelSet& interests,
                                         std::uint32_t universe_size, RngStream& rng);

/// Additive-over-labels valuation row. Owners value Σ_{l∈y(m)} value(l);
/// stations cost Σ_{l∈y(m)} cost(l) · t / reference_rounds (floored).
/// An agent with no label values instead draws one value per model around
/// its mean.
MagnitudeTable<ValuationTag>::Row draw_valuations(const AgentConfig&                 config,
                                                  const std::vector<ModelProposal>& proposals,
                                                  RngStream&                         rng,
                                                  std::uint32_t reference_rounds = 50);

/// Claimed magnitude for a true magnitude under `strategy`. Baseline target
/// strategies bid truthfully.
Money make_bid(const Strategy& strategy, Money truth, RngStream& rng);

/// Label set chosen by a baseline strategy. Throws std::invalid_argument for
/// an empty SelfishIntersection or a non-baseline strategy.
LabelSet select_baseline_target(const Strategy&          strategy,
                                std::span<const LabelSet> owner_interests,
                                std::uint32_t            universe_size,
                                RngStream&               rng);

}  // namespace hcfl
