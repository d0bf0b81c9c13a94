#pragma once

#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"

#include <boost/rational.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hcfl {

using Rational = boost::rational<std::int64_t>;
using Label    = std::uint32_t;
using LabelSet = std::set<Label>;

/// A proposed model m(ω, M, acc, t, y).
struct ModelProposal
{
  ModelId       model_id;
  ParticipantId owner;
  std::uint64_t param_size      = 0;  // ω
  std::uint64_t characteristics = 0;  // M, compute-cost proxy
  Rational      expected_accuracy{1};
  std::uint32_t rounds = 1;  // t
  LabelSet      target_labels;  // y

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;

  friend bool operator==(const ModelProposal&, const ModelProposal&) = default;
};

class MissingEntryError : public std::out_of_range
{
public:
  MissingEntryError(const ParticipantId& p, ModelId m);

  ParticipantId participant;
  ModelId       model;
};

class UnknownParticipantError : public std::out_of_range
{
public:
  explicit UnknownParticipantError(const ParticipantId& p);
};

/// Per-participant, per-model magnitudes. The sign convention is applied by
/// role inside the mechanism, never stored.
///
/// The tag distinguishes claimed bids from true valuations at compile time;
/// both share a layout so `reinterpret_as` converts between them explicitly.
template <class Tag>
class MagnitudeTable
{
public:
  using Row = std::map<ModelId, Money>;

  void set(const ParticipantId& p, ModelId m, Money amount)
  {
    if (amount < Money{0})
      throw std::invalid_argument("negative magnitude for " + p.to_string());
    rows_[p][m] = amount;
  }

  void set_row(const ParticipantId& p, Row row)
  {
    for (auto const& [m, v] : row)
      if (v < Money{0})
        throw std::invalid_argument("negative magnitude for " + p.to_string());
    rows_[p] = std::move(row);
  }

  Money at(const ParticipantId& p, ModelId m) const
  {
    auto r = rows_.find(p);
    if (r == rows_.end())
      throw MissingEntryError(p, m);
    auto v = r->second.find(m);
    if (v == r->second.end())
      throw MissingEntryError(p, m);
    return v->second;
  }

  const Row& row(const ParticipantId& p) const
  {
    auto r = rows_.find(p);
    if (r == rows_.end())
      throw UnknownParticipantError(p);
    return r->second;
  }

  bool contains(const ParticipantId& p) const { return rows_.contains(p); }

  std::vector<ParticipantId> participants() const
  {
    std::vector<ParticipantId> out;
    out.reserve(rows_.size());
    for (auto const& [p, _] : rows_)
      out.push_back(p);
    return out;
  }

  std::size_t size() const { return rows_.size(); }

  /// Copy with p's row removed. Throws if p is unknown.
  MagnitudeTable without(const ParticipantId& p) const
  {
    if (!contains(p))
      throw UnknownParticipantError(p);
    MagnitudeTable copy = *this;
    copy.rows_.erase(p);
    return copy;
  }

  /// Throws MissingEntryError on the first participant lacking a model.
  void require_complete(const std::vector<ModelId>& models) const
  {
    for (auto const& [p, row] : rows_)
      for (auto m : models)
        if (!row.contains(m))
          throw MissingEntryError(p, m);
  }

  template <class Other>
  MagnitudeTable<Other> reinterpret_as() const
  {
    MagnitudeTable<Other> out;
    for (auto const& [p, row] : rows_)
      out.set_row(p, row);
    return out;
  }

  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

  friend bool operator==(const MagnitudeTable&, const MagnitudeTable&) = default;

private:
  std::map<ParticipantId, Row> rows_;
};

struct BidTag
{};
struct ValuationTag
{};

/// Claimed magnitudes b_i^m.
using BidProfile = MagnitudeTable<BidTag>;
/// True magnitudes v_i^m.
using ValuationProfile = MagnitudeTable<ValuationTag>;

inline BidProfile truthful_bids(const ValuationProfile& v)
{
  return v.reinterpret_as<BidTag>();
}

std::vector<ModelId> model_ids(const std::vector<ModelProposal>& proposals);

}  // namespace hcfl
