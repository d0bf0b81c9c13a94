#pragma once

// Simulated crowdfunding contract: a phased state machine whose every
// mutation is an event appended to a hash-chained log. The public state is a
// pure fold over the log, so replay(log) reproduces it exactly.

#include "hcfl/codec.hpp"
#include "hcfl/flsim.hpp"
#include "hcfl/mechanism.hpp"
#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"
#include "hcfl/settlement.hpp"
#include "hcfl/sha256.hpp"

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcfl {

enum class Phase : std::uint8_t
{
  Setup,
  Deposit,
  Proposal,
  Bidding,
  Selection,
  Training,
  Evaluation,
  Settlement,
  Recycle,
  Closed,
};

std::string_view to_string(Phase p);

enum class EventKind : std::uint8_t
{
  RoundOpened,
  PhaseAdvanced,
  Deposited,
  Proposed,
  BidSubmitted,
  ModelSelected,
  TrainingReported,
  VoteCast,
  Punished,
  Settled,
  TaxRecycled,
  RoundAborted,
};

std::string_view to_string(EventKind k);
EventKind        parse_event_kind(std::string_view s);

struct Event
{
  std::uint64_t sequence = 0;
  std::uint64_t round    = 0;
  EventKind     kind     = EventKind::RoundOpened;
  std::string   payload;  // canonical JSON
  Digest        prev_hash{};
  Digest        hash{};

  /// SHA-256 over sequence, round, kind, payload bytes and prev_hash.
  Digest compute_hash() const;

  /// "seq\tround\tkind\tpayload\tprev_hash\thash"
  std::string to_line() const;
  static Event from_line(std::string_view line);

  friend bool operator==(const Event&, const Event&) = default;
};

class PhaseError : public std::logic_error
{
public:
  PhaseError(std::string_view op, Phase actual);
};

class LedgerError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Broken hash chain or sequence gap; `sequence` is the first bad event.
class ChainError : public std::runtime_error
{
public:
  ChainError(std::uint64_t seq, const std::string& what);
  std::uint64_t sequence;
};

/// Thrown by run_selection after the round has been aborted and refunded.
class RoundAbortedError : public LedgerError
{
public:
  using LedgerError::LedgerError;
};

struct PunishmentRecord
{
  std::uint64_t round = 0;
  ParticipantId participant;
  Money         amount;
  std::string   reason;

  friend bool operator==(const PunishmentRecord&, const PunishmentRecord&) = default;
};

/// Public contract state. Plaintext bids appear only after settlement.
struct LedgerState
{
  std::uint64_t                          round = 0;
  Phase                                  phase = Phase::Setup;
  std::set<ParticipantId>                roster;
  std::map<ParticipantId, Money>         deposits;
  std::map<ParticipantId, Money>         balances;
  std::vector<ModelProposal>             proposals;
  std::map<ParticipantId, std::string>   bid_commitments;  // hex digest
  BidProfile                             revealed_bids;
  std::optional<AuctionOutcome>          outcome;
  std::optional<ParticipantId>           winner;
  std::optional<TrainingReport>          training;
  std::map<ParticipantId, bool>          votes;
  bool                                   winner_punished = false;
  std::optional<SettlementResult>        settlement;
  RecyclePool                            recycle_pool;
  std::map<ParticipantId, Money>         refunds;
  std::map<ParticipantId, Money>         cumulative_delta;
  std::vector<PunishmentRecord>          punishments;

  /// SHA-256 of the canonical encoding.
  Digest digest() const;
  json   to_json() const;

  friend bool operator==(const LedgerState&, const LedgerState&) = default;
};

/// Applies one event to `state`. Pure: the same events always produce the
/// same state.
void apply_event(LedgerState& state, const Event& event);

struct LedgerConfig
{
  PaymentPolicy policy;
  Rational      forfeit_fraction{1, 2};  // β
  std::int64_t  deposit_floor_factor = 2;  // deposit ≥ factor · max bid
  Money         min_proposal_deposit{1};
  std::uint64_t seed = 0;  // bid salts
};

/// Role-projected proposal: owners see (acc, y), stations see (ω, t, M).
struct ProposalView
{
  ModelId                      model_id;
  std::optional<Rational>      expected_accuracy;
  std::optional<LabelSet>      target_labels;
  std::optional<std::uint64_t> param_size;
  std::optional<std::uint64_t> characteristics;
  std::optional<std::uint32_t> rounds;
};

struct ParticipantView
{
  ParticipantId                                    self;
  std::uint64_t                                    round = 0;
  Phase                                            phase = Phase::Setup;
  Money                                            deposit;
  Money                                            balance;
  std::vector<ProposalView>                        proposals;
  std::optional<MagnitudeTable<BidTag>::Row>       own_bid;
  std::map<ParticipantId, std::string>             commitments;
  std::optional<BidProfile>                        revealed_bids;
  std::optional<AuctionOutcome>                    outcome;
};

/// Single-writer contract. Every public mutator validates, appends exactly
/// the events it emits, and applies them.
class Ledger
{
public:
  explicit Ledger(LedgerConfig config = {});

  const LedgerState&        state() const { return state_; }
  const std::vector<Event>& log() const { return log_; }
  const LedgerConfig&       config() const { return config_; }

  void open_round(std::span<const ParticipantId> roster);
  void deposit(const ParticipantId& p, Money amount);
  void close_deposits();
  void submit_proposal(const ParticipantId& owner, const ModelProposal& proposal);
  void close_proposals();
  void submit_bid(const ParticipantId& p, const MagnitudeTable<BidTag>::Row& amounts);
  AuctionOutcome run_selection();
  void record_training(const ParticipantId& reporter, const TrainingReport& report);
  void cast_punishment_vote(const ParticipantId& voter, bool punish);
  SettlementResult settle();

  /// Non-winning owners still expected to vote in Evaluation.
  std::vector<ParticipantId> pending_voters() const;

  ParticipantView view_for(const ParticipantId& p) const;

  /// Commitment digest for a bid row under a salt.
  static Digest commitment(const MagnitudeTable<BidTag>::Row& bid, const Digest& salt);

private:
  struct SealedBid
  {
    MagnitudeTable<BidTag>::Row amounts;
    Digest                      salt{};
  };

  void   emit(EventKind kind, const json& payload);
  void   require_phase(std::string_view op, Phase expected) const;
  Digest salt_for(const ParticipantId& p) const;

  LedgerConfig                        config_;
  LedgerState                         state_;
  std::vector<Event>                  log_;
  std::map<ParticipantId, SealedBid>  sealed_;
};

/// Checks sequence continuity and the hash chain. Throws ChainError naming
/// the first bad sequence number.
void verify_chain(std::span<const Event> log);

/// verify_chain, then fold apply_event from a fresh state.
LedgerState replay(std::span<const Event> log);

void               write_event_log(std::ostream& os, std::span<const Event> log);
std::vector<Event> read_event_log(std::istream& is);

}  // namespace hcfl
