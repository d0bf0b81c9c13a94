#include "hcfl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcfl {

void validate(const Strategy& s)
{
  if (auto const* d = std::get_if<Dishonest>(&s))
  {
    if (!(d->prob >= 0.0 && d->prob <= 1.0))
      throw std::invalid_argument("dishonest prob must lie in [0, 1]");
    if (!(d->halfwidth >= 0.0 && d->halfwidth <= 1.0))
      throw std::invalid_argument("dishonest noise halfwidth must lie in [0, 1]");
  }
}

Money draw_around_mean(Money mean, RngStream& rng)
{
  if (mean < Money{0})
    throw std::invalid_argument("negative mean");
  auto const lo = mean.floor_div(2);
  auto const hi = (mean * 3).floor_div(2);
  return Money{uniform_int(rng, lo.gwei(), hi.gwei())};
}

std::map<Label, Money> draw_label_values(Money mean, const LabelSet& interests,
                                         std::uint32_t universe_size, RngStream& rng)
{
  std::map<Label, Money> out;
  for (Label l = 0; l < universe_size; ++l)
    out[l] = interests.contains(l) ? draw_around_mean(mean, rng) : Money{0};
  return out;
}

MagnitudeTable<ValuationTag>::Row draw_valuations(const AgentConfig&                 config,
                                                  const std::vector<ModelProposal>& proposals,
                                                  RngStream&                         rng,
                                                  std::uint32_t reference_rounds)
{
  MagnitudeTable<ValuationTag>::Row row;
  if (config.label_values.empty())
  {
    for (auto const& p : proposals)
      row[p.model_id] = draw_around_mean(config.mean_value, rng);
    return row;
  }

  for (auto const& p : proposals)
  {
    Money sum{0};
    for (auto l : p.target_labels)
    {
      auto it = config.label_values.find(l);
      if (it == config.label_values.end())
        throw std::invalid_argument(config.id.to_string() + " has no value for label " +
                                    std::to_string(l));
      sum += it->second;
    }
    if (config.id.is_station())
      sum = (sum * p.rounds).floor_div(reference_rounds);
    row[p.model_id] = sum;
  }
  return row;
}

Money make_bid(const Strategy& strategy, Money truth, RngStream& rng)
{
  if (truth < Money{0})
    throw std::invalid_argument("make_bid: negative truth");
  auto const* d = std::get_if<Dishonest>(&strategy);
  if (d == nullptr)
    return truth;

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> noise(-d->halfwidth, d->halfwidth);
  double const flip = coin(rng);
  double const u    = noise(rng);
  if (!(flip < d->prob))
    return truth;
  auto const lied = std::llround(static_cast<double>(truth.gwei()) * (1.0 + u));
  return Money{std::max<std::int64_t>(0, lied)};
}

LabelSet select_baseline_target(const Strategy&           strategy,
                                std::span<const LabelSet> owner_interests,
                                std::uint32_t             universe_size,
                                RngStream&                rng)
{
  if (std::holds_alternative<SelfishIntersection>(strategy))
  {
    if (owner_interests.empty())
      throw std::invalid_argument("selfish target: no owners");
    LabelSet acc = owner_interests.front();
    for (auto const& s : owner_interests.subspan(1))
    {
      LabelSet next;
      std::set_intersection(acc.begin(), acc.end(), s.begin(), s.end(),
                            std::inserter(next, next.end()));
      acc = std::move(next);
    }
    if (acc.empty())
      throw std::invalid_argument("selfish target: owners' interests have empty intersection");
    return acc;
  }
  if (std::holds_alternative<RandomTarget>(strategy))
  {
    if (universe_size == 0 || universe_size > 62)
      throw std::invalid_argument("random target: label universe must have 1..62 labels");
    auto const mask = uniform_int(rng, 1, (std::int64_t{1} << universe_size) - 1);
    LabelSet out;
    for (Label l = 0; l < universe_size; ++l)
      if (mask & (std::int64_t{1} << l))
        out.insert(l);
    return out;
  }
  throw std::invalid_argument("select_baseline_target: not a baseline strategy");
}

}  // namespace hcfl
