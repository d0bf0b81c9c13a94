#pragma once

// Canonical JSON encoding for ledger payloads and CLI output. Money is a
// decimal string, rationals are "num/den", participant ids are "O3"/"S0".
// Object keys are sorted, so dump() is canonical.

#include "hcfl/flsim.hpp"
#include "hcfl/mechanism.hpp"
#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"
#include "hcfl/settlement.hpp"

#include <nlohmann/json.hpp>

namespace hcfl {
void to_json(nlohmann::json& j, const Rational& r);
void from_json(const nlohmann::json& j, Rational& r);
}  // namespace hcfl

// boost::rational lives outside hcfl, so ADL cannot find the functions above.
template <>
struct nlohmann::adl_serializer<hcfl::Rational>
{
  static void to_json(json& j, const hcfl::Rational& r) { hcfl::to_json(j, r); }
  static void from_json(const json& j, hcfl::Rational& r) { hcfl::from_json(j, r); }
};

namespace hcfl {

using json = nlohmann::json;

void to_json(json& j, const Money& m);
void from_json(const json& j, Money& m);

void to_json(json& j, const ParticipantId& p);
void from_json(const json& j, ParticipantId& p);

void to_json(json& j, const ModelId& m);
void from_json(const json& j, ModelId& m);

void to_json(json& j, const Rational& r);
void from_json(const json& j, Rational& r);

void to_json(json& j, const ModelProposal& p);
void from_json(const json& j, ModelProposal& p);

void to_json(json& j, const AuctionOutcome& o);
void from_json(const json& j, AuctionOutcome& o);

void to_json(json& j, const TrainingReport& r);
void from_json(const json& j, TrainingReport& r);

void to_json(json& j, const RecyclePool& p);
void from_json(const json& j, RecyclePool& p);

void to_json(json& j, const SettlementResult& r);
void from_json(const json& j, SettlementResult& r);

void to_json(json& j, const BidProfile& b);
void from_json(const json& j, BidProfile& b);

/// Accepts "3/4", "0.75" or an integer.
Rational parse_rational(std::string_view text);

/// Maps keyed by participant become objects keyed by the id string.
template <class V>
json pid_map_to_json(const std::map<ParticipantId, V>& m)
{
  json j = json::object();
  for (auto const& [k, v] : m)
    j[k.to_string()] = v;
  return j;
}

template <class V>
std::map<ParticipantId, V> pid_map_from_json(const json& j)
{
  std::map<ParticipantId, V> out;
  for (auto const& [k, v] : j.items())
    out.emplace(ParticipantId::parse(k), v.template get<V>());
  return out;
}

}  // namespace hcfl
