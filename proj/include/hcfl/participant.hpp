#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace hcfl {

/// Which side of the market a participant is on. Owners fund the reward pool
/// and bid positive value; stations claim cost and receive rewards.
enum class Role : std::uint8_t
{
  ModelOwner,
  BaseStation,
};

std::string_view to_string(Role r);

struct ParticipantId
{
  Role          role  = Role::ModelOwner;
  std::uint32_t index = 0;

  friend constexpr auto operator<=>(const ParticipantId&, const ParticipantId&) = default;

  bool is_owner() const { return role == Role::ModelOwner; }
  bool is_station() const { return role == Role::BaseStation; }

  /// "O3" / "S0"
  std::string to_string() const;
  static ParticipantId parse(std::string_view text);
};

inline ParticipantId owner(std::uint32_t i)
{
  return {Role::ModelOwner, i};
}
inline ParticipantId station(std::uint32_t i)
{
  return {Role::BaseStation, i};
}

inline std::ostream& operator<<(std::ostream& os, const ParticipantId& p)
{
  return os << p.to_string();
}

struct ModelId
{
  std::uint32_t value = 0;

  friend constexpr auto operator<=>(const ModelId&, const ModelId&) = default;
};

inline std::ostream& operator<<(std::ostream& os, ModelId m)
{
  return os << m.value;
}

}  // namespace hcfl
