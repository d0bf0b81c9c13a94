#pragma once

// Synthetic stand-in for hierarchical FL training. Realized accuracy follows a
// saturating curve in per-label data; station contribution is its data share.

#include "hcfl/money.hpp"
#include "hcfl/participant.hpp"
#include "hcfl/profile.hpp"
#include "hcfl/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>

namespace hcfl {

/// acc(n) = acc_max · (1 − exp(−n / kappa)), n in images.
struct AccuracyModel
{
  double        acc_max      = 0.9;
  std::int64_t  kappa        = 2000;
  std::int64_t  total_budget = 10000;
  std::uint32_t reference_rounds = 50;

  void   validate() const;
  double accuracy(std::int64_t images) const;

  friend bool operator==(const AccuracyModel&, const AccuracyModel&) = default;
};

struct TrainingReport
{
  ModelId                          model;
  std::map<Label, double>          per_label_accuracy;  // target labels only
  double                           average_accuracy = 0.0;
  std::map<ParticipantId, Rational> station_contribution;  // sums to exactly 1
  std::uint32_t                    rounds_executed = 0;

  /// Mean accuracy over `labels`; labels outside the target count as 0.
  double accuracy_on(const LabelSet& labels) const;

  friend bool operator==(const TrainingReport&, const TrainingReport&) = default;
};

/// Station data shares in images; must sum to the model's total budget.
using DataShares = std::map<ParticipantId, std::int64_t>;

/// Splits the budget equally across target labels (remainder one image at a
/// time to the smallest labels) and scales accuracy by min(1, t / reference).
TrainingReport train(const ModelProposal& model,
                     const AccuracyModel& acc_model,
                     const DataShares&    station_shares,
                     RngStream&           rng);

/// Equal data shares for `stations` summing to `total_budget`.
DataShares equal_data_shares(std::int64_t total_budget, std::span<const ParticipantId> stations);

/// welfare × average accuracy; zero when no model was trained.
double social_utility_metric(Money welfare, const TrainingReport& report);
double social_utility_metric(Money welfare, const std::optional<TrainingReport>& report);

/// average accuracy ≥ expected · (1 − epsilon).
bool realized_vs_expected(const TrainingReport& report, const ModelProposal& proposal, double epsilon);

}  // namespace hcfl
