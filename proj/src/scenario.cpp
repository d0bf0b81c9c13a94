#include "hcfl/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

namespace hcfl {

namespace {

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where)
{
  if (!j.is_object())
    throw ScenarioError(where + ": expected an object");
  std::set<std::string_view> ok(allowed);
  for (auto const& [k, _] : j.items())
    if (!ok.contains(k))
      throw ScenarioError(where + ": unknown key '" + k + "'");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where)
{
  if (!j.contains(key))
    return;
  try
  {
    out = j.at(key).get<T>();
  }
  catch (const std::exception& e)
  {
    throw ScenarioError(where + "." + key + ": " + e.what());
  }
}

Strategy parse_strategy(const json& j, const std::string& where)
{
  auto const kind = j.is_string() ? j.get<std::string>() : j.value("kind", std::string{});
  if (j.is_object())
    reject_unknown(j, {"kind", "prob", "halfwidth"}, where);
  Strategy s;
  if (kind == "truthful")
    s = Truthful{};
  else if (kind == "dishonest")
  {
    Dishonest d;
    if (j.is_object())
    {
      read(j, "prob", d.prob, where);
      read(j, "halfwidth", d.halfwidth, where);
    }
    s = d;
  }
  else if (kind == "selfish")
    s = SelfishIntersection{};
  else if (kind == "random")
    s = RandomTarget{};
  else
    throw ScenarioError(where + ": unknown strategy '" + kind + "'");
  return s;
}

json strategy_to_json(const Strategy& s)
{
  return std::visit(
      [](auto const& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Dishonest>)
          return json{{"kind", "dishonest"}, {"prob", v.prob}, {"halfwidth", v.halfwidth}};
        else if constexpr (std::is_same_v<T, SelfishIntersection>)
          return "selfish";
        else if constexpr (std::is_same_v<T, RandomTarget>)
          return "random";
        else
          return "truthful";
      },
      s);
}

SocialStrategy parse_social(const std::string& s)
{
  if (s == "vcg")
    return SocialStrategy::Vcg;
  if (s == "selfish")
    return SocialStrategy::Selfish;
  if (s == "random")
    return SocialStrategy::Random;
  throw ScenarioError("social_strategies: unknown strategy '" + s + "'");
}

PaymentPolicy parse_payment(const json& j, std::uint64_t seed)
{
  reject_unknown(j, {"policy", "cm_rule", "weights"}, "payment");
  PaymentPolicy p;
  auto const alloc = j.value("policy", std::string{"equal"});
  if (alloc == "equal")
    p.allocation = EqualAllocation{};
  else if (alloc == "contribution")
    p.allocation = ContributionAllocation{};
  else if (alloc == "capability")
  {
    CapabilityAllocation c;
    if (!j.contains("weights"))
      throw ScenarioError("payment.weights: required for capability allocation");
    for (auto const& [k, v] : j.at("weights").items())
      c.weights[ParticipantId::parse(k)] = v.get<std::int64_t>();
    p.allocation = std::move(c);
  }
  else
    throw ScenarioError("payment.policy: unknown value '" + alloc + "'");
  if (alloc != "capability" && j.contains("weights"))
    throw ScenarioError("payment.weights: only valid with capability allocation");

  auto const rule = j.value("cm_rule", std::string{"midpoint"});
  if (rule == "midpoint")
    p.cm_rule = MidpointRule{};
  else if (rule == "uniform")
    p.cm_rule = SeededUniformRule{seed};
  else
    throw ScenarioError("payment.cm_rule: unknown value '" + rule + "'");
  return p;
}

}  // namespace

std::string_view to_string(SocialStrategy s)
{
  switch (s)
  {
  case SocialStrategy::Vcg: return "vcg";
  case SocialStrategy::Selfish: return "selfish";
  case SocialStrategy::Random: return "random";
  }
  return "?";
}

void ScenarioConfig::validate() const
{
  auto fail = [](const std::string& m) { throw ScenarioError(m); };
  if (num_owners == 0)
    fail("num_owners must be positive");
  if (num_stations == 0)
    fail("num_stations must be positive");
  if (num_models_per_round == 0 || num_models_per_round > num_owners)
    fail("num_models_per_round must lie in [1, num_owners]");
  if (label_universe_size == 0 || label_universe_size > 62)
    fail("label_universe_size must lie in [1, 62]");
  if (owner_mean < Money{0} || station_mean < Money{0} || per_label_owner_mean < Money{0} ||
      per_label_station_mean < Money{0})
    fail("means must be nonnegative");
  if (model_rounds == 0)
    fail("model_rounds must be positive");
  if (expected_accuracy < Rational(0) || expected_accuracy > Rational(1))
    fail("expected_accuracy must lie in [0, 1]");
  if (tracked_owner >= num_owners)
    fail("tracked_owner out of range");
  if (intersection.min_size == 0 || intersection.min_size > intersection.max_size ||
      intersection.max_size > label_universe_size)
    fail("intersection sizes must satisfy 1 <= min_size <= max_size <= label_universe_size");
  if (!(intersection.expansion_prob >= 0.0 && intersection.expansion_prob <= 1.0))
    fail("intersection.expansion_prob must lie in [0, 1]");
  if (forfeit_fraction < Rational(0) || forfeit_fraction > Rational(1))
    fail("ledger.forfeit_fraction must lie in [0, 1]");
  if (deposit_floor_factor < 1)
    fail("ledger.deposit_floor_factor must be at least 1");
  if (!(vote_epsilon >= 0.0 && vote_epsilon <= 1.0))
    fail("ledger.vote_epsilon must lie in [0, 1]");
  if (verify.grid_step <= 0 || verify.max_value < 0 || verify.max_models == 0 || verify.max_owners == 0 ||
      verify.max_stations == 0)
    fail("verify: grid_step and limits must be positive");
  for (auto const& [p, s] : strategies)
  {
    if (p.is_owner() ? p.index >= num_owners : p.index >= num_stations)
      fail("strategies: " + p.to_string() + " is not in the roster");
    try
    {
      hcfl::validate(s);
    }
    catch (const std::invalid_argument& e)
    {
      fail("strategies." + p.to_string() + ": " + e.what());
    }
  }
  try
  {
    hcfl::validate(Strategy{dishonest});
    accuracy.validate();
  }
  catch (const std::invalid_argument& e)
  {
    fail(e.what());
  }
}

ScenarioConfig parse_scenario(const json& j)
{
  reject_unknown(j,
                 {"schema", "seed", "num_owners", "num_stations", "num_models_per_round", "num_rounds",
                  "label_universe_size", "owner_mean", "station_mean", "per_label_means", "model_rounds",
                  "expected_accuracy", "tracked_owner", "dishonest", "strategies", "social_strategies",
                  "intersection", "payment", "accuracy", "ledger", "verify"},
                 "scenario");
  if (!j.contains("schema") || j.at("schema") != kScenarioSchema)
    throw ScenarioError("scenario: missing or unsupported schema (expected \"" + std::string(kScenarioSchema) +
                        "\")");

  ScenarioConfig c;
  std::string const top = "scenario";
  read(j, "seed", c.seed, top);
  read(j, "num_owners", c.num_owners, top);
  read(j, "num_stations", c.num_stations, top);
  read(j, "num_models_per_round", c.num_models_per_round, top);
  if (j.contains("num_rounds") && !j.at("num_rounds").is_null())
  {
    std::uint32_t r = 0;
    read(j, "num_rounds", r, top);
    c.num_rounds = r;
  }
  read(j, "label_universe_size", c.label_universe_size, top);
  read(j, "owner_mean", c.owner_mean, top);
  read(j, "station_mean", c.station_mean, top);
  if (j.contains("per_label_means"))
  {
    auto const& p = j.at("per_label_means");
    reject_unknown(p, {"owner", "station"}, "per_label_means");
    read(p, "owner", c.per_label_owner_mean, "per_label_means");
    read(p, "station", c.per_label_station_mean, "per_label_means");
  }
  read(j, "model_rounds", c.model_rounds, top);
  read(j, "expected_accuracy", c.expected_accuracy, top);
  read(j, "tracked_owner", c.tracked_owner, top);
  if (j.contains("dishonest"))
  {
    auto const& d = j.at("dishonest");
    reject_unknown(d, {"prob", "halfwidth"}, "dishonest");
    read(d, "prob", c.dishonest.prob, "dishonest");
    read(d, "halfwidth", c.dishonest.halfwidth, "dishonest");
  }
  if (j.contains("strategies"))
  {
    for (auto const& [k, v] : j.at("strategies").items())
    {
      ParticipantId p;
      try
      {
        p = ParticipantId::parse(k);
      }
      catch (const std::exception& e)
      {
        throw ScenarioError("strategies: " + std::string(e.what()));
      }
      c.strategies[p] = parse_strategy(v, "strategies." + k);
    }
  }
  if (j.contains("social_strategies"))
  {
    c.social_strategies.clear();
    for (auto const& s : j.at("social_strategies"))
      c.social_strategies.push_back(parse_social(s.get<std::string>()));
  }
  if (j.contains("intersection"))
  {
    auto const& g = j.at("intersection");
    reject_unknown(g, {"min_size", "max_size", "expansion_prob"}, "intersection");
    read(g, "min_size", c.intersection.min_size, "intersection");
    read(g, "max_size", c.intersection.max_size, "intersection");
    read(g, "expansion_prob", c.intersection.expansion_prob, "intersection");
  }
  c.policy = parse_payment(j.value("payment", json::object()), c.seed);
  if (j.contains("accuracy"))
  {
    auto const& a = j.at("accuracy");
    reject_unknown(a, {"acc_max", "kappa", "total_budget", "reference_rounds"}, "accuracy");
    if (a.contains("acc_max"))
    {
      Rational r;
      read(a, "acc_max", r, "accuracy");
      c.accuracy.acc_max = boost::rational_cast<double>(r);
    }
    read(a, "kappa", c.accuracy.kappa, "accuracy");
    read(a, "total_budget", c.accuracy.total_budget, "accuracy");
    read(a, "reference_rounds", c.accuracy.reference_rounds, "accuracy");
  }
  if (j.contains("ledger"))
  {
    auto const& l = j.at("ledger");
    reject_unknown(l, {"forfeit_fraction", "deposit_floor_factor", "vote_epsilon"}, "ledger");
    read(l, "forfeit_fraction", c.forfeit_fraction, "ledger");
    read(l, "deposit_floor_factor", c.deposit_floor_factor, "ledger");
    read(l, "vote_epsilon", c.vote_epsilon, "ledger");
  }
  if (j.contains("verify"))
  {
    auto const& v = j.at("verify");
    reject_unknown(v,
                   {"instances", "max_models", "max_owners", "max_stations", "max_value", "grid_step",
                    "budget_seeds", "participation_seeds"},
                   "verify");
    read(v, "instances", c.verify.instances, "verify");
    read(v, "max_models", c.verify.max_models, "verify");
    read(v, "max_owners", c.verify.max_owners, "verify");
    read(v, "max_stations", c.verify.max_stations, "verify");
    read(v, "max_value", c.verify.max_value, "verify");
    read(v, "grid_step", c.verify.grid_step, "verify");
    read(v, "budget_seeds", c.verify.budget_seeds, "verify");
    read(v, "participation_seeds", c.verify.participation_seeds, "verify");
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ScenarioError("cannot open scenario file " + path.string());
  json j;
  try
  {
    j = json::parse(in);
  }
  catch (const json::parse_error& e)
  {
    throw ScenarioError(path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

json scenario_to_json(const ScenarioConfig& c)
{
  json strategies = json::object();
  for (auto const& [p, s] : c.strategies)
    strategies[p.to_string()] = strategy_to_json(s);
  json social = json::array();
  for (auto s : c.social_strategies)
    social.push_back(to_string(s));

  json payment = json::object();
  std::visit(
      [&](auto const& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, EqualAllocation>)
          payment["policy"] = "equal";
        else if constexpr (std::is_same_v<T, ContributionAllocation>)
          payment["policy"] = "contribution";
        else
        {
          payment["policy"] = "capability";
          payment["weights"]    = pid_map_to_json(a.weights);
        }
      },
      c.policy.allocation);
  payment["cm_rule"] = std::holds_alternative<MidpointRule>(c.policy.cm_rule) ? "midpoint" : "uniform";

  json out{{"schema", kScenarioSchema},
           {"seed", c.seed},
           {"num_owners", c.num_owners},
           {"num_stations", c.num_stations},
           {"num_models_per_round", c.num_models_per_round},
           {"num_rounds", c.num_rounds ? json(*c.num_rounds) : json(nullptr)},
           {"label_universe_size", c.label_universe_size},
           {"owner_mean", c.owner_mean},
           {"station_mean", c.station_mean},
           {"per_label_means", {{"owner", c.per_label_owner_mean}, {"station", c.per_label_station_mean}}},
           {"model_rounds", c.model_rounds},
           {"expected_accuracy", c.expected_accuracy},
           {"tracked_owner", c.tracked_owner},
           {"dishonest", {{"prob", c.dishonest.prob}, {"halfwidth", c.dishonest.halfwidth}}},
           {"strategies", strategies},
           {"social_strategies", social},
           {"intersection",
            {{"min_size", c.intersection.min_size},
             {"max_size", c.intersection.max_size},
             {"expansion_prob", c.intersection.expansion_prob}}},
           {"payment", payment},
           {"accuracy",
            {{"acc_max", std::to_string(c.accuracy.acc_max)},
             {"kappa", c.accuracy.kappa},
             {"total_budget", c.accuracy.total_budget},
             {"reference_rounds", c.accuracy.reference_rounds}}},
           {"ledger",
            {{"forfeit_fraction", c.forfeit_fraction},
             {"deposit_floor_factor", c.deposit_floor_factor},
             {"vote_epsilon", c.vote_epsilon}}},
           {"verify",
            {{"instances", c.verify.instances},
             {"max_models", c.verify.max_models},
             {"max_owners", c.verify.max_owners},
             {"max_stations", c.verify.max_stations},
             {"max_value", c.verify.max_value},
             {"grid_step", c.verify.grid_step},
             {"budget_seeds", c.verify.budget_seeds},
             {"participation_seeds", c.verify.participation_seeds}}}};
  return out;
}

}  // namespace hcfl
