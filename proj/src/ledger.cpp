#include "hcfl/ledger.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace hcfl {

namespace {

constexpr std::array<std::string_view, 10> kPhaseNames{
    "Setup", "Deposit", "Proposal", "Bidding", "Selection",
    "Training", "Evaluation", "Settlement", "Recycle", "Closed"};

constexpr std::array<std::string_view, 12> kKindNames{
    "RoundOpened", "PhaseAdvanced", "Deposited", "Proposed",
    "BidSubmitted", "ModelSelected", "TrainingReported", "VoteCast",
    "Punished", "Settled", "TaxRecycled", "RoundAborted"};

Phase parse_phase(std::string_view s)
{
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i)
    if (kPhaseNames[i] == s)
      return static_cast<Phase>(i);
  throw std::invalid_argument("unknown phase '" + std::string(s) + "'");
}

json row_to_json(const MagnitudeTable<BidTag>::Row& row)
{
  json j = json::object();
  for (auto const& [m, v] : row)
    j[std::to_string(m.value)] = v;
  return j;
}

std::size_t non_winner_owner_count(const LedgerState& s)
{
  return static_cast<std::size_t>(std::count_if(s.roster.begin(), s.roster.end(), [&](auto const& p) {
    return p.is_owner() && p != s.winner;
  }));
}

template <class V>
void add_into(std::map<ParticipantId, Money>& target, const std::map<ParticipantId, V>& deltas)
{
  for (auto const& [p, d] : deltas)
    target[p] += d;
}

}  // namespace

std::string_view to_string(Phase p)
{
  return kPhaseNames.at(static_cast<std::size_t>(p));
}

std::string_view to_string(EventKind k)
{
  return kKindNames.at(static_cast<std::size_t>(k));
}

EventKind parse_event_kind(std::string_view s)
{
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == s)
      return static_cast<EventKind>(i);
  throw std::invalid_argument("unknown event kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// Event

Digest Event::compute_hash() const
{
  std::string buf;
  buf.reserve(payload.size() + 128);
  buf += std::to_string(sequence);
  buf += '\n';
  buf += std::to_string(round);
  buf += '\n';
  buf += to_string(kind);
  buf += '\n';
  buf += payload;
  buf += '\n';
  buf += to_hex(prev_hash);
  return sha256(buf);
}

std::string Event::to_line() const
{
  std::string s = std::to_string(sequence);
  s += '\t';
  s += std::to_string(round);
  s += '\t';
  s += to_string(kind);
  s += '\t';
  s += payload;
  s += '\t';
  s += to_hex(prev_hash);
  s += '\t';
  s += to_hex(hash);
  return s;
}

Event Event::from_line(std::string_view line)
{
  std::vector<std::string_view> f;
  std::size_t                   start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
  {
    if (i == line.size() || line[i] == '\t')
    {
      f.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  if (f.size() != 6)
    throw std::invalid_argument("event line must have 6 tab-separated fields");
  Event e;
  e.sequence  = std::stoull(std::string(f[0]));
  e.round     = std::stoull(std::string(f[1]));
  e.kind      = parse_event_kind(f[2]);
  e.payload   = std::string(f[3]);
  e.prev_hash = digest_from_hex(f[4]);
  e.hash      = digest_from_hex(f[5]);
  return e;
}

PhaseError::PhaseError(std::string_view op, Phase actual)
  : std::logic_error(std::string(op) + " not allowed in phase " + std::string(to_string(actual)))
{}

ChainError::ChainError(std::uint64_t seq, const std::string& what)
  : std::runtime_error("event " + std::to_string(seq) + ": " + what)
  , sequence(seq)
{}

// ---------------------------------------------------------------------------
// State

json LedgerState::to_json() const
{
  json punish = json::array();
  for (auto const& p : punishments)
    punish.push_back(
        {{"round", p.round}, {"participant", p.participant}, {"amount", p.amount}, {"reason", p.reason}});
  json votes_j = json::object();
  for (auto const& [p, v] : votes)
    votes_j[p.to_string()] = v;

  return json{{"round", round},
              {"phase", to_string(phase)},
              {"roster", roster},
              {"deposits", pid_map_to_json(deposits)},
              {"balances", pid_map_to_json(balances)},
              {"proposals", proposals},
              {"bid_commitments", pid_map_to_json(bid_commitments)},
              {"revealed_bids", revealed_bids},
              {"outcome", outcome ? json(*outcome) : json(nullptr)},
              {"winner", winner ? json(*winner) : json(nullptr)},
              {"training", training ? json(*training) : json(nullptr)},
              {"votes", votes_j},
              {"winner_punished", winner_punished},
              {"settlement", settlement ? json(*settlement) : json(nullptr)},
              {"recycle_pool", recycle_pool},
              {"refunds", pid_map_to_json(refunds)},
              {"cumulative_delta", pid_map_to_json(cumulative_delta)},
              {"punishments", punish}};
}

Digest LedgerState::digest() const
{
  return sha256(to_json().dump());
}

void apply_event(LedgerState& s, const Event& e)
{
  json const p = json::parse(e.payload);
  switch (e.kind)
  {
  case EventKind::RoundOpened: {
    RecyclePool pool       = s.recycle_pool;
    auto        cumulative = std::move(s.cumulative_delta);
    auto        punish     = std::move(s.punishments);
    s                      = LedgerState{};
    s.round                = p.at("round").get<std::uint64_t>();
    s.phase                = Phase::Deposit;
    for (auto const& r : p.at("roster"))
      s.roster.insert(r.get<ParticipantId>());
    s.recycle_pool     = pool;
    s.cumulative_delta = std::move(cumulative);
    s.punishments      = std::move(punish);
    break;
  }
  case EventKind::PhaseAdvanced:
    s.phase = parse_phase(p.at("to").get<std::string>());
    break;
  case EventKind::Deposited: {
    auto const who    = p.at("participant").get<ParticipantId>();
    auto const amount = p.at("amount").get<Money>();
    s.deposits[who] += amount;
    s.balances[who] += amount;
    break;
  }
  case EventKind::Proposed:
    s.proposals.push_back(p.at("proposal").get<ModelProposal>());
    break;
  case EventKind::BidSubmitted:
    s.bid_commitments[p.at("participant").get<ParticipantId>()] =
        p.at("commitment").get<std::string>();
    break;
  case EventKind::ModelSelected:
    s.outcome = p.at("outcome").get<AuctionOutcome>();
    if (!p.at("winner").is_null())
      s.winner = p.at("winner").get<ParticipantId>();
    s.phase = s.outcome->selected ? Phase::Training : Phase::Settlement;
    break;
  case EventKind::TrainingReported:
    s.training = p.at("report").get<TrainingReport>();
    s.phase    = non_winner_owner_count(s) == 0 ? Phase::Settlement : Phase::Evaluation;
    break;
  case EventKind::VoteCast: {
    s.votes[p.at("voter").get<ParticipantId>()] = p.at("punish").get<bool>();
    auto const needed = non_winner_owner_count(s);
    if (s.votes.size() == needed)
    {
      auto const yes    = std::count_if(s.votes.begin(), s.votes.end(), [](auto const& v) { return v.second; });
      s.winner_punished = static_cast<std::size_t>(2 * yes) > needed;
      s.phase           = Phase::Settlement;
    }
    break;
  }
  case EventKind::Punished:
    s.punishments.push_back({e.round,
                             p.at("participant").get<ParticipantId>(),
                             p.at("amount").get<Money>(),
                             p.at("reason").get<std::string>()});
    break;
  case EventKind::Settled: {
    auto result     = p.at("settlement").get<SettlementResult>();
    auto revealed   = p.at("revealed_bids").get<BidProfile>();
    auto const& slt = p.at("salts");
    for (auto const& [who, row] : revealed)
    {
      auto const salt = digest_from_hex(slt.at(who.to_string()).get<std::string>());
      auto const it   = s.bid_commitments.find(who);
      if (it == s.bid_commitments.end() || it->second != to_hex(Ledger::commitment(row, salt)))
        throw LedgerError("revealed bid of " + who.to_string() + " does not match its commitment");
    }
    add_into(s.balances, result.balance_deltas);
    add_into(s.cumulative_delta, result.balance_deltas);
    s.recycle_pool  = result.next_pool;
    s.revealed_bids = std::move(revealed);
    s.settlement    = std::move(result);
    s.phase         = Phase::Recycle;
    break;
  }
  case EventKind::TaxRecycled:
  case EventKind::RoundAborted:
    s.refunds = s.balances;
    s.phase   = Phase::Closed;
    break;
  }
}

// ---------------------------------------------------------------------------
// Ledger

Ledger::Ledger(LedgerConfig config)
  : config_(std::move(config))
{}

void Ledger::emit(EventKind kind, const json& payload)
{
  Event e;
  e.sequence  = log_.size();
  e.round     = kind == EventKind::RoundOpened ? payload.at("round").get<std::uint64_t>() : state_.round;
  e.kind      = kind;
  e.payload   = payload.dump();
  e.prev_hash = log_.empty() ? kZeroDigest : log_.back().hash;
  e.hash      = e.compute_hash();
  apply_event(state_, e);
  log_.push_back(std::move(e));
}

void Ledger::require_phase(std::string_view op, Phase expected) const
{
  if (state_.phase != expected)
    throw PhaseError(op, state_.phase);
}

Digest Ledger::salt_for(const ParticipantId& p) const
{
  return sha256("salt|" + std::to_string(config_.seed) + "|" + std::to_string(state_.round) + "|" +
                p.to_string());
}

Digest Ledger::commitment(const MagnitudeTable<BidTag>::Row& bid, const Digest& salt)
{
  return sha256(to_hex(salt) + "|" + row_to_json(bid).dump());
}

void Ledger::open_round(std::span<const ParticipantId> roster)
{
  if (state_.phase != Phase::Setup && state_.phase != Phase::Closed)
    throw PhaseError("open_round", state_.phase);
  if (roster.empty())
    throw LedgerError("open_round: empty roster");
  std::set<ParticipantId> unique(roster.begin(), roster.end());
  if (unique.size() != roster.size())
    throw LedgerError("open_round: duplicate participant in roster");
  sealed_.clear();
  emit(EventKind::RoundOpened, {{"round", state_.round + 1}, {"roster", unique}});
}

void Ledger::deposit(const ParticipantId& p, Money amount)
{
  require_phase("deposit", Phase::Deposit);
  if (!state_.roster.contains(p))
    throw LedgerError("deposit: " + p.to_string() + " is not in this round's roster");
  if (amount <= Money{0})
    throw LedgerError("deposit: amount must be positive");
  emit(EventKind::Deposited, {{"participant", p}, {"amount", amount}});
}

void Ledger::close_deposits()
{
  require_phase("close_deposits", Phase::Deposit);
  emit(EventKind::PhaseAdvanced, {{"from", to_string(Phase::Deposit)}, {"to", to_string(Phase::Proposal)}});
}

void Ledger::submit_proposal(const ParticipantId& owner, const ModelProposal& proposal)
{
  require_phase("submit_proposal", Phase::Proposal);
  if (!owner.is_owner())
    throw LedgerError("submit_proposal: " + owner.to_string() + " is not a model owner");
  if (!state_.roster.contains(owner))
    throw LedgerError("submit_proposal: " + owner.to_string() + " is not in this round's roster");
  if (proposal.owner != owner)
    throw LedgerError("submit_proposal: proposal owner does not match submitter");
  proposal.validate();
  for (auto const& existing : state_.proposals)
    if (existing.model_id == proposal.model_id)
      throw LedgerError("submit_proposal: duplicate model id " + std::to_string(proposal.model_id.value));
  auto it = state_.deposits.find(owner);
  if (it == state_.deposits.end() || it->second < config_.min_proposal_deposit)
    throw LedgerError("submit_proposal: " + owner.to_string() + " has not met the deposit floor");
  emit(EventKind::Proposed, {{"proposal", proposal}});
}

void Ledger::close_proposals()
{
  require_phase("close_proposals", Phase::Proposal);
  if (state_.proposals.empty())
    throw LedgerError("close_proposals: no proposals");
  emit(EventKind::PhaseAdvanced, {{"from", to_string(Phase::Proposal)}, {"to", to_string(Phase::Bidding)}});
}

void Ledger::submit_bid(const ParticipantId& p, const MagnitudeTable<BidTag>::Row& amounts)
{
  require_phase("submit_bid", Phase::Bidding);
  if (!state_.roster.contains(p))
    throw LedgerError("submit_bid: " + p.to_string() + " is not in this round's roster");
  if (sealed_.contains(p) || state_.bid_commitments.contains(p))
    throw LedgerError("submit_bid: " + p.to_string() + " already submitted");
  if (amounts.size() != state_.proposals.size())
    throw LedgerError("submit_bid: bid from " + p.to_string() + " must cover every proposal exactly");
  Money max_bid{0};
  for (auto const& prop : state_.proposals)
  {
    auto it = amounts.find(prop.model_id);
    if (it == amounts.end())
      throw LedgerError("submit_bid: " + p.to_string() + " has no bid for model " +
                        std::to_string(prop.model_id.value));
    if (it->second < Money{0})
      throw LedgerError("submit_bid: negative bid");
    max_bid = std::max(max_bid, it->second);
  }
  auto const dep = state_.deposits.contains(p) ? state_.deposits.at(p) : Money{0};
  if (dep < max_bid * config_.deposit_floor_factor)
    throw LedgerError("submit_bid: deposit of " + p.to_string() + " (" + dep.to_string() +
                      ") below floor " + (max_bid * config_.deposit_floor_factor).to_string());

  SealedBid sealed{amounts, salt_for(p)};
  auto const digest = commitment(amounts, sealed.salt);
  sealed_.emplace(p, std::move(sealed));
  emit(EventKind::BidSubmitted, {{"participant", p}, {"commitment", to_hex(digest)}});
}

AuctionOutcome Ledger::run_selection()
{
  require_phase("run_selection", Phase::Bidding);

  emit(EventKind::PhaseAdvanced, {{"from", to_string(Phase::Bidding)}, {"to", to_string(Phase::Selection)}});

  std::vector<ParticipantId> missing;
  for (auto const& p : state_.roster)
    if (!sealed_.contains(p))
      missing.push_back(p);
  if (!missing.empty())
  {
    emit(EventKind::RoundAborted, {{"reason", "missing bids"}, {"missing", missing}});
    throw RoundAbortedError("run_selection: " + std::to_string(missing.size()) +
                            " participant(s) did not bid; round aborted and deposits refunded");
  }

  BidProfile bids;
  for (auto const& [p, sb] : sealed_)
    bids.set_row(p, sb.amounts);
  auto const ids     = model_ids(state_.proposals);
  auto       outcome = run_auction(bids, ids, make_payment_fn(config_.policy, state_.round));

  json winner = nullptr;
  if (outcome.selected)
    for (auto const& prop : state_.proposals)
      if (prop.model_id == *outcome.selected)
        winner = prop.owner;
  emit(EventKind::ModelSelected, {{"outcome", outcome}, {"winner", winner}});
  return outcome;
}

void Ledger::record_training(const ParticipantId& reporter, const TrainingReport& report)
{
  require_phase("record_training", Phase::Training);
  if (reporter != state_.winner)
    throw LedgerError("record_training: " + reporter.to_string() + " is not the winner");
  if (report.model != *state_.outcome->selected)
    throw LedgerError("record_training: report is for a different model");
  for (auto const& p : state_.roster)
    if (p.is_station() && !report.station_contribution.contains(p))
      throw LedgerError("record_training: report does not cover station " + p.to_string());
  emit(EventKind::TrainingReported, {{"reporter", reporter}, {"report", report}});
}

std::vector<ParticipantId> Ledger::pending_voters() const
{
  std::vector<ParticipantId> out;
  if (state_.phase != Phase::Evaluation)
    return out;
  for (auto const& p : state_.roster)
    if (p.is_owner() && p != state_.winner && !state_.votes.contains(p))
      out.push_back(p);
  return out;
}

void Ledger::cast_punishment_vote(const ParticipantId& voter, bool punish)
{
  require_phase("cast_punishment_vote", Phase::Evaluation);
  if (!voter.is_owner())
    throw LedgerError("cast_punishment_vote: stations do not vote");
  if (voter == state_.winner)
    throw LedgerError("cast_punishment_vote: the winner cannot vote");
  if (!state_.roster.contains(voter))
    throw LedgerError("cast_punishment_vote: " + voter.to_string() + " is not in this round's roster");
  if (state_.votes.contains(voter))
    throw LedgerError("cast_punishment_vote: " + voter.to_string() + " already voted");
  emit(EventKind::VoteCast, {{"voter", voter}, {"punish", punish}});
}

SettlementResult Ledger::settle()
{
  require_phase("settle", Phase::Settlement);
  if (!state_.outcome)
    throw LedgerError("settle: no auction outcome");

  std::vector<ParticipantId> roster(state_.roster.begin(), state_.roster.end());
  ContributionWeights const* contributions =
      state_.training ? &state_.training->station_contribution : nullptr;
  auto r = settle_round(*state_.outcome, config_.policy, roster, state_.recycle_pool, contributions);

  std::vector<PunishmentRecord> punished;

  if (state_.winner_punished && state_.winner)
  {
    auto const winner = *state_.winner;
    auto const dep    = state_.deposits.contains(winner) ? state_.deposits.at(winner) : Money{0};
    Money const forfeit{dep.gwei() * config_.forfeit_fraction.numerator() /
                        config_.forfeit_fraction.denominator()};
    std::vector<std::pair<ParticipantId, std::int64_t>> others;
    for (auto const& p : roster)
      if (p.is_owner() && p != winner)
        others.emplace_back(p, 1);
    if (!others.empty() && forfeit > Money{0})
    {
      r.forfeits         = apportion(forfeit, others);
      r.forfeits[winner] = -forfeit;
      add_into(r.balance_deltas, r.forfeits);
      punished.push_back({state_.round, winner, forfeit, "vote"});
    }
  }

  // A debit larger than the remaining balance slashes the balance to zero;
  // the recycle pool covers the gap so every credit is paid in full.
  for (auto& [p, delta] : r.balance_deltas)
  {
    Money const bal = state_.balances.contains(p) ? state_.balances.at(p) : Money{0};
    if (bal + delta >= Money{0})
      continue;
    Money const gap = -(bal + delta);
    delta += gap;
    r.shortfalls[p] = gap;
    Money from_owner_pool = std::min(gap, r.next_pool.from_owners);
    r.next_pool.from_owners -= from_owner_pool;
    r.next_pool.from_stations -= gap - from_owner_pool;
    if (r.next_pool.from_stations < Money{0})
      throw LedgerError("settle: " + p.to_string() + " is insolvent by " + gap.to_string() +
                        " and the recycle pool cannot cover it");
    r.recycle_pool_delta -= gap;
    punished.push_back({state_.round, p, bal, "insolvent"});
  }

  if (!verify_budget_balance(r))
    throw InvariantError("settlement failed the budget-balance check");

  for (auto const& rec : punished)
    emit(EventKind::Punished, {{"participant", rec.participant}, {"amount", rec.amount}, {"reason", rec.reason}});

  BidProfile revealed;
  json       salts = json::object();
  for (auto const& [p, sb] : sealed_)
  {
    revealed.set_row(p, sb.amounts);
    salts[p.to_string()] = to_hex(sb.salt);
  }
  emit(EventKind::Settled, {{"settlement", r}, {"revealed_bids", revealed}, {"salts", salts}});
  emit(EventKind::TaxRecycled, {{"pool", r.next_pool}});
  return r;
}

ParticipantView Ledger::view_for(const ParticipantId& p) const
{
  ParticipantView v;
  v.self    = p;
  v.round   = state_.round;
  v.phase   = state_.phase;
  v.deposit = state_.deposits.contains(p) ? state_.deposits.at(p) : Money{0};
  v.balance = state_.balances.contains(p) ? state_.balances.at(p) : Money{0};
  for (auto const& prop : state_.proposals)
  {
    ProposalView pv;
    pv.model_id = prop.model_id;
    if (p.is_owner())
    {
      pv.expected_accuracy = prop.expected_accuracy;
      pv.target_labels     = prop.target_labels;
    }
    else
    {
      pv.param_size      = prop.param_size;
      pv.rounds          = prop.rounds;
      pv.characteristics = prop.characteristics;
    }
    v.proposals.push_back(std::move(pv));
  }
  if (auto it = sealed_.find(p); it != sealed_.end())
    v.own_bid = it->second.amounts;
  v.commitments = state_.bid_commitments;
  if (state_.settlement)
    v.revealed_bids = state_.revealed_bids;
  v.outcome = state_.outcome;
  return v;
}

// ---------------------------------------------------------------------------
// Log

void verify_chain(std::span<const Event> log)
{
  Digest prev = kZeroDigest;
  for (std::size_t i = 0; i < log.size(); ++i)
  {
    auto const& e = log[i];
    if (e.sequence != i)
      throw ChainError(i, "sequence gap (found " + std::to_string(e.sequence) + ")");
    if (e.prev_hash != prev)
      throw ChainError(e.sequence, "prev_hash does not match the preceding event");
    if (e.compute_hash() != e.hash)
      throw ChainError(e.sequence, "hash does not match contents");
    prev = e.hash;
  }
}

LedgerState replay(std::span<const Event> log)
{
  verify_chain(log);
  LedgerState s;
  for (auto const& e : log)
    apply_event(s, e);
  return s;
}

void write_event_log(std::ostream& os, std::span<const Event> log)
{
  for (auto const& e : log)
    os << e.to_line() << '\n';
}

std::vector<Event> read_event_log(std::istream& is)
{
  std::vector<Event> out;
  std::string        line;
  std::uint64_t      lineno = 0;
  while (std::getline(is, line))
  {
    ++lineno;
    if (line.empty())
      continue;
    try
    {
      out.push_back(Event::from_line(line));
    }
    catch (const std::exception& ex)
    {
      throw ChainError(out.size(), "unparseable line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace hcfl
