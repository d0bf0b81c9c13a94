#include "hcfl/codec.hpp"

#include <charconv>

namespace hcfl {

void to_json(json& j, const Money& m)
{
  j = m.to_string();
}
void from_json(const json& j, Money& m)
{
  m = Money::parse(j.get<std::string>());
}

void to_json(json& j, const ParticipantId& p)
{
  j = p.to_string();
}
void from_json(const json& j, ParticipantId& p)
{
  p = ParticipantId::parse(j.get<std::string>());
}

void to_json(json& j, const ModelId& m)
{
  j = m.value;
}
void from_json(const json& j, ModelId& m)
{
  m.value = j.get<std::uint32_t>();
}

Rational parse_rational(std::string_view text)
{
  auto to_int = [&](std::string_view s) {
    std::int64_t v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
      throw std::invalid_argument("bad rational: '" + std::string(text) + "'");
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos)
  {
    auto den = to_int(text.substr(slash + 1));
    if (den == 0)
      throw std::invalid_argument("bad rational: zero denominator");
    return Rational(to_int(text.substr(0, slash)), den);
  }
  if (auto dot = text.find('.'); dot != std::string_view::npos)
  {
    auto frac = text.substr(dot + 1);
    if (frac.size() > 15)
      throw std::invalid_argument("bad rational: too many decimals in '" + std::string(text) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i)
      scale *= 10;
    auto whole    = text.substr(0, dot);
    bool negative = !whole.empty() && whole.front() == '-';
    auto w        = whole.empty() || whole == "-" ? 0 : to_int(whole);
    auto f        = frac.empty() ? 0 : to_int(frac);
    auto num      = (negative ? -1 : 1) * (std::abs(w) * scale + f);
    return Rational(num, scale);
  }
  return Rational(to_int(text));
}

void to_json(json& j, const Rational& r)
{
  j = std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}
void from_json(const json& j, Rational& r)
{
  r = j.is_number_integer() ? Rational(j.get<std::int64_t>()) : parse_rational(j.get<std::string>());
}

void to_json(json& j, const ModelProposal& p)
{
  j = json{{"model_id", p.model_id},
           {"owner", p.owner},
           {"param_size", p.param_size},
           {"characteristics", p.characteristics},
           {"expected_accuracy", p.expected_accuracy},
           {"rounds", p.rounds},
           {"target_labels", p.target_labels}};
}
void from_json(const json& j, ModelProposal& p)
{
  j.at("model_id").get_to(p.model_id);
  j.at("owner").get_to(p.owner);
  j.at("param_size").get_to(p.param_size);
  j.at("characteristics").get_to(p.characteristics);
  j.at("expected_accuracy").get_to(p.expected_accuracy);
  j.at("rounds").get_to(p.rounds);
  j.at("target_labels").get_to(p.target_labels);
}

void to_json(json& j, const AuctionOutcome& o)
{
  json welfare = json::object();
  for (auto const& [m, w] : o.welfare)
    welfare[std::to_string(m.value)] = w;
  json cf = json::object();
  for (auto const& [p, m] : o.counterfactual_selected)
    cf[p.to_string()] = m ? json(*m) : json(nullptr);
  j = json{{"selected", o.selected ? json(*o.selected) : json(nullptr)},
           {"welfare", welfare},
           {"counterfactual_selected", cf},
           {"pilots", o.pilots},
           {"taxes", pid_map_to_json(o.taxes)},
           {"payments", pid_map_to_json(o.payments)},
           {"total_payment", o.total_payment}};
}
void from_json(const json& j, AuctionOutcome& o)
{
  o = {};
  if (!j.at("selected").is_null())
    o.selected = j.at("selected").get<ModelId>();
  for (auto const& [k, v] : j.at("welfare").items())
    o.welfare[ModelId{static_cast<std::uint32_t>(std::stoul(k))}] = v.get<Money>();
  for (auto const& [k, v] : j.at("counterfactual_selected").items())
    o.counterfactual_selected[ParticipantId::parse(k)] =
        v.is_null() ? std::nullopt : std::optional<ModelId>(v.get<ModelId>());
  for (auto const& p : j.at("pilots"))
    o.pilots.insert(p.get<ParticipantId>());
  o.taxes         = pid_map_from_json<Money>(j.at("taxes"));
  o.payments      = pid_map_from_json<Money>(j.at("payments"));
  o.total_payment = j.at("total_payment").get<Money>();
}

void to_json(json& j, const TrainingReport& r)
{
  json acc = json::object();
  for (auto const& [l, a] : r.per_label_accuracy)
    acc[std::to_string(l)] = a;
  j = json{{"model", r.model},
           {"per_label_accuracy", acc},
           {"average_accuracy", r.average_accuracy},
           {"station_contribution", pid_map_to_json(r.station_contribution)},
           {"rounds_executed", r.rounds_executed}};
}
void from_json(const json& j, TrainingReport& r)
{
  r = {};
  j.at("model").get_to(r.model);
  for (auto const& [k, v] : j.at("per_label_accuracy").items())
    r.per_label_accuracy[static_cast<Label>(std::stoul(k))] = v.get<double>();
  j.at("average_accuracy").get_to(r.average_accuracy);
  r.station_contribution = pid_map_from_json<Rational>(j.at("station_contribution"));
  j.at("rounds_executed").get_to(r.rounds_executed);
}

void to_json(json& j, const RecyclePool& p)
{
  j = json{{"from_owners", p.from_owners}, {"from_stations", p.from_stations}};
}
void from_json(const json& j, RecyclePool& p)
{
  j.at("from_owners").get_to(p.from_owners);
  j.at("from_stations").get_to(p.from_stations);
}

void to_json(json& j, const SettlementResult& r)
{
  j = json{{"total_payment", r.total_payment},
           {"owner_shares", pid_map_to_json(r.owner_shares)},
           {"station_rewards", pid_map_to_json(r.station_rewards)},
           {"taxes", pid_map_to_json(r.taxes)},
           {"owner_rebates", pid_map_to_json(r.owner_rebates)},
           {"station_bonuses", pid_map_to_json(r.station_bonuses)},
           {"forfeits", pid_map_to_json(r.forfeits)},
           {"shortfalls", pid_map_to_json(r.shortfalls)},
           {"balance_deltas", pid_map_to_json(r.balance_deltas)},
           {"recycle_pool_delta", r.recycle_pool_delta},
           {"revenue", r.revenue},
           {"next_pool", r.next_pool}};
}
void from_json(const json& j, SettlementResult& r)
{
  r.total_payment      = j.at("total_payment").get<Money>();
  r.owner_shares       = pid_map_from_json<Money>(j.at("owner_shares"));
  r.station_rewards    = pid_map_from_json<Money>(j.at("station_rewards"));
  r.taxes              = pid_map_from_json<Money>(j.at("taxes"));
  r.owner_rebates      = pid_map_from_json<Money>(j.at("owner_rebates"));
  r.station_bonuses    = pid_map_from_json<Money>(j.at("station_bonuses"));
  r.forfeits           = pid_map_from_json<Money>(j.at("forfeits"));
  r.shortfalls         = pid_map_from_json<Money>(j.at("shortfalls"));
  r.balance_deltas     = pid_map_from_json<Money>(j.at("balance_deltas"));
  r.recycle_pool_delta = j.at("recycle_pool_delta").get<Money>();
  r.revenue            = j.at("revenue").get<Money>();
  r.next_pool          = j.at("next_pool").get<RecyclePool>();
}

void to_json(json& j, const BidProfile& b)
{
  j = json::object();
  for (auto const& [p, row] : b)
  {
    json r = json::object();
    for (auto const& [m, v] : row)
      r[std::to_string(m.value)] = v;
    j[p.to_string()] = r;
  }
}
void from_json(const json& j, BidProfile& b)
{
  b = {};
  for (auto const& [k, row] : j.items())
  {
    auto p = ParticipantId::parse(k);
    for (auto const& [m, v] : row.items())
      b.set(p, ModelId{static_cast<std::uint32_t>(std::stoul(m))}, v.get<Money>());
  }
}

}  // namespace hcfl
