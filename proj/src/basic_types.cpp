#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"

#include <charconv>

namespace hcfl {

Money Money::floor_div(std::int64_t d) const
{
  if (d == 0)
    throw std::domain_error("money division by zero");
  if (gwei_ == INT64_MIN && d == -1)
    throw OverflowError("money division overflow");
  std::int64_t q = gwei_ / d;
  if ((gwei_ % d != 0) && ((gwei_ < 0) != (d < 0)))
    --q;
  return Money{q};
}

Money Money::parse(std::string_view text)
{
  std::int64_t v{};
  auto const*  first = text.data();
  auto const*  last  = text.data() + text.size();
  if (!text.empty() && text.front() == '+')
    ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec == std::errc::result_out_of_range)
    throw OverflowError("money literal out of range: " + std::string(text));
  if (ec != std::errc{} || ptr != last || first == last)
    throw std::invalid_argument("not a decimal integer: '" + std::string(text) + "'");
  return Money{v};
}

std::string_view to_string(Role r)
{
  return r == Role::ModelOwner ? "ModelOwner" : "BaseStation";
}

std::string ParticipantId::to_string() const
{
  return (is_owner() ? "O" : "S") + std::to_string(index);
}

ParticipantId ParticipantId::parse(std::string_view text)
{
  if (text.size() < 2 || (text[0] != 'O' && text[0] != 'S'))
    throw std::invalid_argument("bad participant id: '" + std::string(text) + "'");
  std::uint32_t idx{};
  auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), idx);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("bad participant id: '" + std::string(text) + "'");
  return {text[0] == 'O' ? Role::ModelOwner : Role::BaseStation, idx};
}

void ModelProposal::validate() const
{
  if (target_labels.empty())
    throw std::invalid_argument("proposal " + std::to_string(model_id.value) +
                                ": target labels must be nonempty");
  if (expected_accuracy <= 0 || expected_accuracy > 1)
    throw std::invalid_argument("proposal " + std::to_string(model_id.value) +
                                ": expected accuracy must lie in (0, 1]");
  if (rounds < 1)
    throw std::invalid_argument("proposal " + std::to_string(model_id.value) +
                                ": rounds must be at least 1");
  if (!owner.is_owner())
    throw std::invalid_argument("proposal " + std::to_string(model_id.value) +
                                ": proposer must be a model owner");
}

MissingEntryError::MissingEntryError(const ParticipantId& p, ModelId m)
  : std::out_of_range("missing bid for participant " + p.to_string() + " on model " +
                      std::to_string(m.value))
  , participant(p)
  , model(m)
{}

UnknownParticipantError::UnknownParticipantError(const ParticipantId& p)
  : std::out_of_range("unknown participant " + p.to_string())
{}

std::vector<ModelId> model_ids(const std::vector<ModelProposal>& proposals)
{
  std::vector<ModelId> out;
  out.reserve(proposals.size());
  for (auto const& p : proposals)
    out.push_back(p.model_id);
  return out;
}

}  // namespace hcfl
